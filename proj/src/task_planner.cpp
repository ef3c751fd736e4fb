#include "simba/task_planner.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "simba/error.hpp"

namespace simba {

namespace {

Guard canonical(const Guard& g, std::size_t num_props) {
    const std::vector<Symbol> symbols = g.symbols(num_props);
    return Guard::from_symbols(symbols, num_props);
}

}  // namespace

std::size_t PrunedDfa::step(std::size_t q, Symbol s) const {
    for (const Transition& t : edges.at(q))
        if (t.guard.eval(s)) return t.target;
    throw std::logic_error("pruned automaton is not total");
}

Symbol PrunedDfa::symbol_of(const LabelSet& label) const {
    Symbol s = 0;
    for (std::size_t b = 0; b < prop_index.size(); ++b)
        if (label.contains(prop_index[b])) s |= Symbol{1} << b;
    return s;
}

PrunedDfa prune_letters(const Dfa& dfa, const Labeler& labeler, const AdjacencyGraph& adjacency) {
    const PropTable& props = labeler.props();
    const std::size_t np = dfa.props().size();

    PrunedDfa out;
    out.base = dfa;
    for (const std::string& name : dfa.props()) {
        auto idx = props.find(name);
        if (!idx) throw UnknownProposition("automaton proposition '" + name + "' is not declared");
        out.prop_index.push_back(*idx);
    }

    std::vector<Cube> blocking;
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = i + 1; j < np; ++j) {
            const AtomicProp& pi = props.at(out.prop_index[i]);
            const AtomicProp& pj = props.at(out.prop_index[j]);
            const double mass = (1.0 - pi.alpha) + (1.0 - pj.alpha);
            if (!(mass > 1.0)) continue;
            bool impossible = false;
            if (pi.polarity == Polarity::Reach && pj.polarity == Polarity::Reach) {
                impossible = pi.region != pj.region && !adjacency.intersecting(pi.region, pj.region);
            } else if (pi.polarity != pj.polarity) {
                const AtomicProp& reach = pi.polarity == Polarity::Reach ? pi : pj;
                const AtomicProp& avoid = pi.polarity == Polarity::Reach ? pj : pi;
                const Polytope* inner = labeler.find_region(reach.region);
                const Polytope* outer = labeler.find_region(avoid.region);
                impossible = reach.region == avoid.region || (inner && outer && inner->is_subset_of(*outer));
            }
            if (impossible) {
                const std::uint32_t bits = (1u << i) | (1u << j);
                blocking.push_back({bits, bits});
            }
        }
    }
    out.blocked = blocking.empty() ? Guard::never() : canonical(Guard(blocking), np);

    const std::size_t n = dfa.num_states();
    out.sink = n;
    out.edges.resize(n + 1);
    for (std::size_t q = 0; q < n; ++q) {
        for (const Transition& t : dfa.transitions(q)) {
            Guard g = canonical(t.guard.minus(out.blocked), np);
            if (!g.empty()) out.edges[q].push_back({std::move(g), t.target});
        }
        if (!out.blocked.empty()) out.edges[q].push_back({out.blocked, out.sink});
    }
    out.edges[out.sink].push_back({Guard::always(), out.sink});
    out.cov.assign(n + 1, 0);
    out.numsel.assign(n + 1, 0);
    out.dist = dist_from_acc(out);
    return out;
}

std::vector<int> dist_from_acc(const PrunedDfa& dfa) {
    const std::size_t n = dfa.num_states();
    std::vector<std::vector<std::size_t>> reverse(n);
    for (std::size_t q = 0; q < n; ++q)
        for (const Transition& t : dfa.edges[q]) reverse[t.target].push_back(q);

    std::vector<int> dist(n, kUnreachable);
    std::deque<std::size_t> queue;
    for (std::size_t q = 0; q < n; ++q)
        if (dfa.is_accepting(q)) {
            dist[q] = 0;
            queue.push_back(q);
        }
    if (queue.empty()) throw InfeasibleSpecification("the task automaton has no accepting state");
    while (!queue.empty()) {
        const std::size_t q = queue.front();
        queue.pop_front();
        for (std::size_t p : reverse[q])
            if (dist[p] == kUnreachable) {
                dist[p] = dist[q] + 1;
                queue.push_back(p);
            }
    }
    return dist;
}

double feasibility_weight(long cov, long numsel, int dist) {
    const double d = dist <= 0 ? 1.0 : static_cast<double>(dist);
    const double sel = static_cast<double>(numsel) + 1.0;
    return (static_cast<double>(cov) + 1.0) / (d * sel * sel);
}

double state_weight(const PrunedDfa& dfa, std::size_t q) {
    return feasibility_weight(dfa.cov.at(q), dfa.numsel.at(q), dfa.dist.at(q));
}

double edge_weight(const PrunedDfa& dfa, std::size_t q, std::size_t q_next) {
    return 1.0 / (state_weight(dfa, q) * state_weight(dfa, q_next));
}

bool TaskPlan::contains(std::size_t q) const { return std::find(run.begin(), run.end(), q) != run.end(); }

std::size_t TaskPlan::successor(std::size_t q) const {
    auto it = std::find(run.begin(), run.end(), q);
    if (it == run.end() || std::next(it) == run.end()) return q;
    return *std::next(it);
}

TaskPlan plan_task(PrunedDfa& dfa, std::size_t start) {
    const std::size_t n = dfa.num_states();
    if (start >= n || !dfa.usable(start)) {
        std::string msg = "no accepting state is reachable from automaton state " + std::to_string(start);
        if (!dfa.blocked.empty()) msg += "; pruned letters: " + dfa.blocked.to_string(dfa.base.props());
        throw InfeasibleSpecification(msg);
    }
    std::vector<double> cost(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> parent(n, n);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    cost[start] = 0.0;
    open.push({0.0, start});
    std::size_t goal = n;
    while (!open.empty()) {
        auto [c, q] = open.top();
        open.pop();
        if (c > cost[q]) continue;
        if (dfa.is_accepting(q)) {
            goal = q;
            break;
        }
        for (const Transition& t : dfa.edges[q]) {
            const std::size_t r = t.target;
            if (r == q || !dfa.usable(r)) continue;
            const double nc = c + edge_weight(dfa, q, r);
            if (nc < cost[r]) {
                cost[r] = nc;
                parent[r] = q;
                open.push({nc, r});
            }
        }
    }
    if (goal == n) throw InfeasibleSpecification("no accepting run from automaton state " + std::to_string(start));

    TaskPlan plan;
    for (std::size_t q = goal; q != n; q = parent[q]) plan.run.push_back(q);
    std::reverse(plan.run.begin(), plan.run.end());
    for (std::size_t q : plan.run) ++dfa.numsel[q];
    return plan;
}

std::string export_dot(const PrunedDfa& dfa) {
    std::ostringstream out;
    out << "digraph pruned {\n  rankdir=LR;\n";
    for (std::size_t q = 0; q < dfa.num_states(); ++q) {
        out << "  q" << q << " [shape=" << (dfa.is_accepting(q) ? "doublecircle" : "circle");
        if (q == dfa.base.initial()) out << ", style=bold, xlabel=\"start\"";
        if (q == dfa.sink) out << ", style=dashed, xlabel=\"pruned\"";
        out << "];\n";
    }
    for (std::size_t q = 0; q < dfa.num_states(); ++q)
        for (const Transition& t : dfa.edges[q])
            out << "  q" << q << " -> q" << t.target << " [label=\"" << t.guard.to_string(dfa.base.props())
                << "\"];\n";
    out << "}\n";
    return out.str();
}

}  // namespace simba
