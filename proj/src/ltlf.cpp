#include "simba/ltlf.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "simba/error.hpp"

namespace simba {

PropTable::PropTable(std::vector<AtomicProp> props) {
    for (auto& p : props) add(std::move(p));
}

void PropTable::add(AtomicProp prop) {
    if (find(prop.name)) throw InvalidInput("duplicate proposition '" + prop.name + "'");
    if (!(prop.alpha >= 0.0 && prop.alpha <= 1.0))
        throw InvalidInput("proposition '" + prop.name + "': alpha must lie in [0, 1]");
    props_.push_back(std::move(prop));
}

std::optional<std::size_t> PropTable::find(std::string_view name) const {
    for (std::size_t i = 0; i < props_.size(); ++i)
        if (props_[i].name == name) return i;
    return std::nullopt;
}

namespace ltlf {

namespace {

Formula node(Op op, Formula lhs = nullptr, Formula rhs = nullptr) {
    return std::make_shared<const Node>(Node{op, {}, std::move(lhs), std::move(rhs)});
}

enum class Tok { Ident, True, False, Not, And, Or, Next, Until, Eventually, Globally, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        switch (c) {
            case '!': out.push_back({Tok::Not, "!", start}); ++i; continue;
            case '&': out.push_back({Tok::And, "&", start}); ++i; continue;
            case '|': out.push_back({Tok::Or, "|", start}); ++i; continue;
            case '(': out.push_back({Tok::LParen, "(", start}); ++i; continue;
            case ')': out.push_back({Tok::RParen, ")", start}); ++i; continue;
            default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                ++i;
            std::string word(text.substr(start, i - start));
            Tok kind = Tok::Ident;
            if (word == "X") kind = Tok::Next;
            else if (word == "U") kind = Tok::Until;
            else if (word == "F") kind = Tok::Eventually;
            else if (word == "G") kind = Tok::Globally;
            else if (word == "true") kind = Tok::True;
            else if (word == "false") kind = Tok::False;
            out.push_back({kind, std::move(word), start});
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({Tok::End, "", text.size()});
    return out;
}

class Parser {
public:
    Parser(std::string_view text, const PropTable* props) : tokens_(tokenize(text)), props_(props) {}

    Formula run() {
        Formula f = parse_or();
        if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
        return f;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }

    Formula parse_or() {
        Formula f = parse_and();
        while (peek().kind == Tok::Or) {
            take();
            f = make_or(f, parse_and());
        }
        return f;
    }

    Formula parse_and() {
        Formula f = parse_until();
        while (peek().kind == Tok::And) {
            take();
            f = make_and(f, parse_until());
        }
        return f;
    }

    Formula parse_until() {
        Formula f = parse_unary();
        if (peek().kind == Tok::Until) {
            take();
            return make_until(f, parse_until());
        }
        return f;
    }

    Formula parse_unary() {
        switch (peek().kind) {
            case Tok::Not: take(); return make_not(parse_unary());
            case Tok::Next: take(); return make_next(parse_unary());
            case Tok::Eventually: take(); return make_eventually(parse_unary());
            case Tok::Globally: take(); return make_globally(parse_unary());
            default: return parse_primary();
        }
    }

    Formula parse_primary() {
        const Token& t = take();
        switch (t.kind) {
            case Tok::True: return make_true();
            case Tok::False: return make_false();
            case Tok::Ident:
                if (props_ && !props_->find(t.text))
                    throw UnknownProposition("unknown proposition '" + t.text + "' at position " +
                                             std::to_string(t.pos));
                return make_atom(t.text);
            case Tok::LParen: {
                Formula f = parse_or();
                if (peek().kind != Tok::RParen) throw ParseError("expected ')'", peek().pos);
                take();
                return f;
            }
            case Tok::End: throw ParseError("unexpected end of input", t.pos);
            default: throw ParseError("unexpected '" + t.text + "'", t.pos);
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const PropTable* props_;
};

// Semantics at position i of a word of length n.
bool holds(const Formula& f, std::span<const Symbol> w, std::size_t i,
           const std::vector<std::string>& alphabet) {
    const std::size_t n = w.size();
    switch (f->op) {
        case Op::True: return true;
        case Op::False: return false;
        case Op::Atom: {
            auto it = std::find(alphabet.begin(), alphabet.end(), f->atom);
            if (it == alphabet.end()) return false;
            return (w[i] >> static_cast<unsigned>(it - alphabet.begin())) & 1u;
        }
        case Op::Not: return !holds(f->lhs, w, i, alphabet);
        case Op::And: return holds(f->lhs, w, i, alphabet) && holds(f->rhs, w, i, alphabet);
        case Op::Or: return holds(f->lhs, w, i, alphabet) || holds(f->rhs, w, i, alphabet);
        case Op::Next: return i + 1 < n && holds(f->lhs, w, i + 1, alphabet);
        case Op::Until:
            for (std::size_t j = i; j < n; ++j) {
                if (holds(f->rhs, w, j, alphabet)) return true;
                if (!holds(f->lhs, w, j, alphabet)) return false;
            }
            return false;
        case Op::Eventually:
            for (std::size_t j = i; j < n; ++j)
                if (holds(f->lhs, w, j, alphabet)) return true;
            return false;
        case Op::Globally:
            for (std::size_t j = i; j < n; ++j)
                if (!holds(f->lhs, w, j, alphabet)) return false;
            return true;
    }
    return false;
}

}  // namespace

Formula make_atom(std::string name) {
    return std::make_shared<const Node>(Node{Op::Atom, std::move(name), nullptr, nullptr});
}
Formula make_true() { return node(Op::True); }
Formula make_false() { return node(Op::False); }
Formula make_not(Formula f) { return node(Op::Not, std::move(f)); }
Formula make_and(Formula a, Formula b) { return node(Op::And, std::move(a), std::move(b)); }
Formula make_or(Formula a, Formula b) { return node(Op::Or, std::move(a), std::move(b)); }
Formula make_next(Formula f) { return node(Op::Next, std::move(f)); }
Formula make_until(Formula a, Formula b) { return node(Op::Until, std::move(a), std::move(b)); }
Formula make_eventually(Formula f) { return node(Op::Eventually, std::move(f)); }
Formula make_globally(Formula f) { return node(Op::Globally, std::move(f)); }

Formula parse(std::string_view text, const PropTable& props) { return Parser(text, &props).run(); }

Formula parse_unchecked(std::string_view text) { return Parser(text, nullptr).run(); }

std::string to_string(const Formula& f) {
    switch (f->op) {
        case Op::Atom: return f->atom;
        case Op::True: return "true";
        case Op::False: return "false";
        case Op::Not: return "!" + to_string(f->lhs);
        case Op::Next: return "X " + to_string(f->lhs);
        case Op::Eventually: return "F " + to_string(f->lhs);
        case Op::Globally: return "G " + to_string(f->lhs);
        case Op::And: return "(" + to_string(f->lhs) + " & " + to_string(f->rhs) + ")";
        case Op::Or: return "(" + to_string(f->lhs) + " | " + to_string(f->rhs) + ")";
        case Op::Until: return "(" + to_string(f->lhs) + " U " + to_string(f->rhs) + ")";
    }
    return {};
}

bool structurally_equal(const Formula& a, const Formula& b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op || a->atom != b->atom) return false;
    return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

std::vector<std::string> atoms(const Formula& f) {
    std::vector<std::string> out;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (!g) return;
        if (g->op == Op::Atom && std::find(out.begin(), out.end(), g->atom) == out.end())
            out.push_back(g->atom);
        walk(g->lhs);
        walk(g->rhs);
    };
    walk(f);
    return out;
}

int depth(const Formula& f) {
    if (!f) return 0;
    return 1 + std::max(depth(f->lhs), depth(f->rhs));
}

bool eval_word(const Formula& f, std::span<const Symbol> word,
               const std::vector<std::string>& alphabet) {
    if (word.empty()) throw InvalidInput("LTLf words must be nonempty");
    return holds(f, word, 0, alphabet);
}

}  // namespace ltlf
}  // namespace simba
