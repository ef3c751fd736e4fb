#include "simba/dfa.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "simba/error.hpp"

namespace simba {

// ---------------------------------------------------------------------------
// Guard
// ---------------------------------------------------------------------------

Guard Guard::from_symbols(std::span<const Symbol> symbols, std::size_t num_props) {
    if (symbols.empty()) return never();
    const std::uint32_t full = num_props >= 32 ? ~0u : ((1u << num_props) - 1u);

    // Quine-McCluskey: merge cubes that differ in one cared bit until stable.
    std::set<std::pair<std::uint32_t, std::uint32_t>> current;
    for (Symbol s : symbols) current.insert({full, s & full});
    std::set<std::pair<std::uint32_t, std::uint32_t>> primes;
    while (!current.empty()) {
        std::set<std::pair<std::uint32_t, std::uint32_t>> next;
        std::set<std::pair<std::uint32_t, std::uint32_t>> merged;
        for (auto it = current.begin(); it != current.end(); ++it) {
            for (auto jt = std::next(it); jt != current.end(); ++jt) {
                if (it->first != jt->first) continue;
                const std::uint32_t diff = it->second ^ jt->second;
                if (std::popcount(diff) != 1) continue;
                next.insert({it->first & ~diff, it->second & ~diff});
                merged.insert(*it);
                merged.insert(*jt);
            }
        }
        for (const auto& c : current)
            if (!merged.count(c)) primes.insert(c);
        current = std::move(next);
    }

    // Greedy cover, largest prime first.
    std::vector<Cube> candidates;
    for (const auto& [care, value] : primes) candidates.push_back({care, value});
    std::set<Symbol> uncovered(symbols.begin(), symbols.end());
    std::vector<Cube> cover;
    while (!uncovered.empty()) {
        std::size_t best = 0;
        std::size_t best_count = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            std::size_t count = 0;
            for (Symbol s : uncovered)
                if (candidates[i].matches(s)) ++count;
            if (count > best_count) {
                best_count = count;
                best = i;
            }
        }
        if (best_count == 0) throw std::logic_error("guard cover failed");
        cover.push_back(candidates[best]);
        for (auto it = uncovered.begin(); it != uncovered.end();)
            it = candidates[best].matches(*it) ? uncovered.erase(it) : std::next(it);
    }
    std::sort(cover.begin(), cover.end(), [](const Cube& a, const Cube& b) {
        return std::tie(a.care, a.value) < std::tie(b.care, b.value);
    });
    return Guard(std::move(cover));
}

bool Guard::eval(Symbol s) const noexcept {
    return std::any_of(cubes_.begin(), cubes_.end(), [s](const Cube& c) { return c.matches(s); });
}

std::vector<Symbol> Guard::symbols(std::size_t num_props) const {
    std::vector<Symbol> out;
    const Symbol n = Symbol{1} << num_props;
    for (Symbol s = 0; s < n; ++s)
        if (eval(s)) out.push_back(s);
    return out;
}

Guard Guard::operator|(const Guard& other) const {
    std::vector<Cube> cubes = cubes_;
    for (const Cube& c : other.cubes_)
        if (std::find(cubes.begin(), cubes.end(), c) == cubes.end()) cubes.push_back(c);
    return Guard(std::move(cubes));
}

Guard Guard::minus(const Guard& other) const {
    std::vector<Cube> result = cubes_;
    for (const Cube& d : other.cubes_) {
        std::vector<Cube> next;
        for (const Cube& c : result) {
            const std::uint32_t common = c.care & d.care;
            if ((c.value ^ d.value) & common) {  // disjoint
                next.push_back(c);
                continue;
            }
            Cube cur = c;
            std::uint32_t free_bits = d.care & ~c.care;
            while (free_bits) {
                const std::uint32_t bit = free_bits & (~free_bits + 1u);
                free_bits &= ~bit;
                next.push_back({cur.care | bit, cur.value | (~d.value & bit)});
                cur.care |= bit;
                cur.value |= d.value & bit;
            }
            // cur is now contained in d and is dropped
        }
        result = std::move(next);
    }
    return Guard(std::move(result));
}

std::string Guard::to_string(const std::vector<std::string>& props) const {
    if (cubes_.empty()) return "false";
    std::string out;
    for (std::size_t i = 0; i < cubes_.size(); ++i) {
        const Cube& c = cubes_[i];
        std::vector<std::string> lits;
        for (std::size_t b = 0; b < props.size(); ++b) {
            if (!((c.care >> b) & 1u)) continue;
            lits.push_back(((c.value >> b) & 1u) ? props[b] : "!" + props[b]);
        }
        std::string term;
        if (lits.empty()) term = "true";
        for (std::size_t k = 0; k < lits.size(); ++k) term += (k ? " & " : "") + lits[k];
        if (cubes_.size() > 1 && lits.size() > 1) term = "(" + term + ")";
        out += (i ? " | " : "") + term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dfa
// ---------------------------------------------------------------------------

Dfa Dfa::from_table(std::vector<std::string> props, std::size_t initial, std::vector<bool> accepting,
                    const std::vector<std::vector<std::size_t>>& table) {
    const std::size_t n = accepting.size();
    const std::size_t num_symbols = std::size_t{1} << props.size();
    if (table.size() != n || initial >= n) throw InvalidInput("malformed transition table");
    Dfa dfa;
    dfa.transitions_.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        if (table[q].size() != num_symbols) throw InvalidInput("transition table row has wrong width");
        std::map<std::size_t, std::vector<Symbol>> by_target;
        for (Symbol s = 0; s < num_symbols; ++s) {
            if (table[q][s] >= n) throw InvalidInput("transition target out of range");
            by_target[table[q][s]].push_back(s);
        }
        for (const auto& [target, symbols] : by_target)
            dfa.transitions_[q].push_back({Guard::from_symbols(symbols, props.size()), target});
    }
    dfa.props_ = std::move(props);
    dfa.initial_ = initial;
    dfa.accepting_ = std::move(accepting);
    return dfa;
}

std::size_t Dfa::num_transitions() const {
    std::size_t n = 0;
    for (const auto& ts : transitions_) n += ts.size();
    return n;
}

std::size_t Dfa::step(std::size_t q, Symbol s) const {
    for (const Transition& t : transitions_.at(q))
        if (t.guard.eval(s)) return t.target;
    throw std::logic_error("automaton is not total");
}

std::size_t Dfa::run(std::span<const Symbol> word) const {
    std::size_t q = initial_;
    for (Symbol s : word) q = step(q, s);
    return q;
}

std::vector<std::vector<std::size_t>> Dfa::table() const {
    const std::size_t num_symbols = std::size_t{1} << props_.size();
    std::vector<std::vector<std::size_t>> out(num_states(), std::vector<std::size_t>(num_symbols));
    for (std::size_t q = 0; q < num_states(); ++q)
        for (Symbol s = 0; s < num_symbols; ++s) out[q][s] = step(q, s);
    return out;
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

namespace {

using Table = std::vector<std::vector<std::size_t>>;

Dfa minimize_table(std::vector<std::string> props, std::size_t initial, const std::vector<bool>& accepting,
                   const Table& table) {
    const std::size_t num_symbols = std::size_t{1} << props.size();

    // Restrict to states reachable from the initial state.
    std::vector<long> reach_id(accepting.size(), -1);
    std::vector<std::size_t> order{initial};
    reach_id[initial] = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t t : table[order[i]])
            if (reach_id[t] < 0) {
                reach_id[t] = static_cast<long>(order.size());
                order.push_back(t);
            }
    const std::size_t n = order.size();
    Table delta(n, std::vector<std::size_t>(num_symbols));
    std::vector<bool> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] = accepting[order[i]];
        for (std::size_t s = 0; s < num_symbols; ++s) delta[i][s] = static_cast<std::size_t>(reach_id[table[order[i]][s]]);
    }

    // inverse[s][t] = predecessors of t on s
    std::vector<std::vector<std::vector<std::size_t>>> inverse(num_symbols, std::vector<std::vector<std::size_t>>(n));
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t s = 0; s < num_symbols; ++s) inverse[s][delta[q][s]].push_back(q);

    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::size_t> block_of(n);
    {
        std::vector<std::size_t> acc_states, rej_states;
        for (std::size_t q = 0; q < n; ++q) (acc[q] ? acc_states : rej_states).push_back(q);
        for (auto* part : {&acc_states, &rej_states}) {
            if (part->empty()) continue;
            for (std::size_t q : *part) block_of[q] = blocks.size();
            blocks.push_back(*part);
        }
    }
    std::set<std::size_t> work;
    for (std::size_t b = 0; b < blocks.size(); ++b) work.insert(b);

    std::vector<char> in_splitter(n);
    while (!work.empty()) {
        const std::size_t a = *work.begin();
        work.erase(work.begin());
        const std::vector<std::size_t> splitter = blocks[a];
        for (std::size_t s = 0; s < num_symbols; ++s) {
            std::fill(in_splitter.begin(), in_splitter.end(), 0);
            std::vector<std::size_t> touched;
            for (std::size_t t : splitter)
                for (std::size_t p : inverse[s][t]) {
                    if (in_splitter[p]) continue;
                    in_splitter[p] = 1;
                    touched.push_back(block_of[p]);
                }
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            for (std::size_t y : touched) {
                std::vector<std::size_t> inside, outside;
                for (std::size_t q : blocks[y]) (in_splitter[q] ? inside : outside).push_back(q);
                if (inside.empty() || outside.empty()) continue;
                const std::size_t fresh = blocks.size();
                blocks[y] = std::move(inside);
                blocks.push_back(std::move(outside));
                for (std::size_t q : blocks[fresh]) block_of[q] = fresh;
                if (work.count(y)) {
                    work.insert(fresh);
                } else {
                    work.insert(blocks[y].size() <= blocks[fresh].size() ? y : fresh);
                }
            }
        }
    }

    // Renumber blocks in BFS order from the initial block.
    std::vector<long> new_id(blocks.size(), -1);
    std::vector<std::size_t> block_order{block_of[0]};
    new_id[block_of[0]] = 0;
    for (std::size_t i = 0; i < block_order.size(); ++i) {
        const std::size_t rep = blocks[block_order[i]].front();
        for (std::size_t s = 0; s < num_symbols; ++s) {
            const std::size_t b = block_of[delta[rep][s]];
            if (new_id[b] < 0) {
                new_id[b] = static_cast<long>(block_order.size());
                block_order.push_back(b);
            }
        }
    }
    Table min_table(block_order.size(), std::vector<std::size_t>(num_symbols));
    std::vector<bool> min_acc(block_order.size());
    for (std::size_t i = 0; i < block_order.size(); ++i) {
        const std::size_t rep = blocks[block_order[i]].front();
        min_acc[i] = acc[rep];
        for (std::size_t s = 0; s < num_symbols; ++s)
            min_table[i][s] = static_cast<std::size_t>(new_id[block_of[delta[rep][s]]]);
    }
    return Dfa::from_table(std::move(props), 0, std::move(min_acc), min_table);
}

// ---------------------------------------------------------------------------
// LTLf progression
// ---------------------------------------------------------------------------

enum class K { True, False, Lit, NegLit, And, Or, Next, WeakNext, Until, Release };

struct NNode {
    K kind;
    int prop;
    int a;
    int b;
};

using Clause = std::vector<int>;  // conjunction of obligations (sorted)
using Dnf = std::vector<Clause>;  // disjunction of clauses (normalized)

struct Expansion {
    Dnf next;  // obligation on the remaining suffix if the word continues
    bool end;  // truth value if the word ends at this position
};

class Progression {
public:
    explicit Progression(const std::vector<std::string>& alphabet) {
        for (std::size_t i = 0; i < alphabet.size(); ++i) bits_[alphabet[i]] = static_cast<int>(i);
        true_ = make(K::True);
        false_ = make(K::False);
    }

    int convert(const ltlf::Formula& f, bool neg) {
        using ltlf::Op;
        switch (f->op) {
            case Op::True: return neg ? false_ : true_;
            case Op::False: return neg ? true_ : false_;
            case Op::Atom: {
                auto it = bits_.find(f->atom);
                if (it == bits_.end()) throw InvalidInput("atom '" + f->atom + "' missing from alphabet");
                return make(neg ? K::NegLit : K::Lit, it->second);
            }
            case Op::Not: return convert(f->lhs, !neg);
            case Op::And: return make(neg ? K::Or : K::And, -1, convert(f->lhs, neg), convert(f->rhs, neg));
            case Op::Or: return make(neg ? K::And : K::Or, -1, convert(f->lhs, neg), convert(f->rhs, neg));
            case Op::Next: return make(neg ? K::WeakNext : K::Next, -1, convert(f->lhs, neg));
            case Op::Until:
                return make(neg ? K::Release : K::Until, -1, convert(f->lhs, neg), convert(f->rhs, neg));
            case Op::Eventually:
                return neg ? make(K::Release, -1, false_, convert(f->lhs, true))
                           : make(K::Until, -1, true_, convert(f->lhs, false));
            case Op::Globally:
                return neg ? make(K::Until, -1, true_, convert(f->lhs, true))
                           : make(K::Release, -1, false_, convert(f->lhs, false));
        }
        throw std::logic_error("unhandled operator");
    }

    Dnf clause_of(int id) const {
        if (id == true_) return Dnf{Clause{}};
        if (id == false_) return Dnf{};
        return Dnf{Clause{id}};
    }

    const Expansion& expand(int id, Symbol s) {
        const auto key = std::make_pair(id, s);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const NNode n = nodes_[static_cast<std::size_t>(id)];
        Expansion e;
        switch (n.kind) {
            case K::True: e = {Dnf{Clause{}}, true}; break;
            case K::False: e = {Dnf{}, false}; break;
            case K::Lit:
            case K::NegLit: {
                const bool v = ((s >> n.prop) & 1u) != 0;
                const bool holds = (n.kind == K::Lit) ? v : !v;
                e = holds ? Expansion{Dnf{Clause{}}, true} : Expansion{Dnf{}, false};
                break;
            }
            case K::And: {
                const Expansion ea = expand(n.a, s);
                const Expansion& eb = expand(n.b, s);
                e = {conj(ea.next, eb.next), ea.end && eb.end};
                break;
            }
            case K::Or: {
                const Expansion ea = expand(n.a, s);
                const Expansion& eb = expand(n.b, s);
                e = {disj(ea.next, eb.next), ea.end || eb.end};
                break;
            }
            case K::Next: e = {clause_of(n.a), false}; break;
            case K::WeakNext: e = {clause_of(n.a), true}; break;
            case K::Until: {  // b | (a & X(a U b))
                const Expansion ea = expand(n.a, s);
                const Expansion& eb = expand(n.b, s);
                e = {disj(eb.next, conj(ea.next, Dnf{Clause{id}})), eb.end};
                break;
            }
            case K::Release: {  // b & (a | WX(a R b))
                const Expansion ea = expand(n.a, s);
                const Expansion& eb = expand(n.b, s);
                e = {conj(eb.next, disj(ea.next, Dnf{Clause{id}})), eb.end};
                break;
            }
        }
        return memo_.emplace(key, std::move(e)).first->second;
    }

    static Dnf normalize(Dnf d) {
        for (auto& c : d) {
            std::sort(c.begin(), c.end());
            c.erase(std::unique(c.begin(), c.end()), c.end());
        }
        std::sort(d.begin(), d.end(), [](const Clause& x, const Clause& y) {
            return x.size() != y.size() ? x.size() < y.size() : x < y;
        });
        d.erase(std::unique(d.begin(), d.end()), d.end());
        Dnf kept;
        for (auto& c : d) {
            const bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Clause& k) {
                return std::includes(c.begin(), c.end(), k.begin(), k.end());
            });
            if (!absorbed) kept.push_back(std::move(c));
        }
        std::sort(kept.begin(), kept.end());
        return kept;
    }

    static Dnf conj(const Dnf& x, const Dnf& y) {
        Dnf out;
        out.reserve(x.size() * y.size());
        for (const Clause& a : x)
            for (const Clause& b : y) {
                Clause c;
                std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(c));
                out.push_back(std::move(c));
            }
        return normalize(std::move(out));
    }

    static Dnf disj(const Dnf& x, const Dnf& y) {
        Dnf out = x;
        out.insert(out.end(), y.begin(), y.end());
        return normalize(std::move(out));
    }

private:
    int make(K kind, int prop = -1, int a = -1, int b = -1) {
        if (kind == K::And) {
            if (a == false_ || b == false_) return false_;
            if (a == true_) return b;
            if (b == true_ || a == b) return a;
            if (a > b) std::swap(a, b);
        } else if (kind == K::Or) {
            if (a == true_ || b == true_) return true_;
            if (a == false_) return b;
            if (b == false_ || a == b) return a;
            if (a > b) std::swap(a, b);
        }
        const auto key = std::make_tuple(static_cast<int>(kind), prop, a, b);
        if (auto it = index_.find(key); it != index_.end()) return it->second;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({kind, prop, a, b});
        index_.emplace(key, id);
        return id;
    }

    std::map<std::string, int> bits_;
    std::vector<NNode> nodes_;
    std::map<std::tuple<int, int, int, int>, int> index_;
    std::map<std::pair<int, Symbol>, Expansion> memo_;
    int true_ = -1;
    int false_ = -1;
};

}  // namespace

Dfa minimize(const Dfa& dfa) {
    return minimize_table(dfa.props(), dfa.initial(), dfa.accepting(), dfa.table());
}

Dfa compile_to_dfa(const ltlf::Formula& f, const CompileOptions& options) {
    std::vector<std::string> alphabet = options.alphabet;
    if (alphabet.empty()) alphabet = ltlf::atoms(f);
    for (const std::string& a : ltlf::atoms(f))
        if (std::find(alphabet.begin(), alphabet.end(), a) == alphabet.end())
            throw InvalidInput("alphabet does not contain atom '" + a + "'");
    if (alphabet.size() > options.max_props || alphabet.size() > 31)
        throw ResourceError("alphabet of " + std::to_string(alphabet.size()) + " propositions exceeds cap of " +
                            std::to_string(options.max_props));
    const Symbol num_symbols = Symbol{1} << alphabet.size();

    Progression prog(alphabet);
    const int root = prog.convert(f, false);

    // A state is (residual obligation, whether the word may end here).
    using State = std::pair<Dnf, bool>;
    std::map<State, std::size_t> ids;
    std::vector<State> states;
    auto intern = [&](State st) {
        auto [it, inserted] = ids.emplace(st, states.size());
        if (inserted) {
            if (states.size() >= options.max_states)
                throw ResourceError("DFA construction exceeded the cap of " + std::to_string(options.max_states) +
                                    " states");
            states.push_back(std::move(st));
        }
        return it->second;
    };
    intern({prog.clause_of(root), false});

    Table table;
    for (std::size_t i = 0; i < states.size(); ++i) {
        std::vector<std::size_t> row(num_symbols);
        for (Symbol s = 0; s < num_symbols; ++s) {
            Dnf next;
            bool end = false;
            for (const Clause& clause : states[i].first) {
                Dnf acc{Clause{}};
                bool acc_end = true;
                for (int obligation : clause) {
                    const Expansion& e = prog.expand(obligation, s);
                    acc = Progression::conj(acc, e.next);
                    acc_end = acc_end && e.end;
                }
                next.insert(next.end(), acc.begin(), acc.end());
                end = end || acc_end;
            }
            row[s] = intern({Progression::normalize(std::move(next)), end});
        }
        table.push_back(std::move(row));
    }

    std::vector<bool> accepting(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) accepting[i] = states[i].second;
    return minimize_table(std::move(alphabet), 0, accepting, table);
}

std::string export_dot(const Dfa& dfa, const std::string& graph_name) {
    std::ostringstream out;
    out << "digraph " << graph_name << " {\n";
    out << "  rankdir=LR;\n";
    for (std::size_t q = 0; q < dfa.num_states(); ++q) {
        out << "  q" << q << " [shape=" << (dfa.is_accepting(q) ? "doublecircle" : "circle");
        if (q == dfa.initial()) out << ", style=bold, xlabel=\"start\"";
        out << "];\n";
    }
    for (std::size_t q = 0; q < dfa.num_states(); ++q)
        for (const Transition& t : dfa.transitions(q))
            out << "  q" << q << " -> q" << t.target << " [label=\"" << t.guard.to_string(dfa.props()) << "\"];\n";
    out << "}\n";
    return out.str();
}

}  // namespace simba
