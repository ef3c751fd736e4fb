/**
 * @file ltlf.hpp
 * @brief LTLf formulas over probabilistic atomic propositions: AST, parser,
 *        pretty printer and a direct finite-trace semantics evaluator.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simba {

enum class Polarity { Reach, Avoid };

/// pi^alpha (Reach) holds iff P(x in region) > 1 - alpha.
/// The Avoid form holds iff P(x not in region) >= 1 - alpha.
struct AtomicProp {
    std::string name;
    std::string region;
    double alpha = 0.05;
    Polarity polarity = Polarity::Reach;
};

class PropTable {
public:
    PropTable() = default;
    explicit PropTable(std::vector<AtomicProp> props);

    void add(AtomicProp prop);
    std::optional<std::size_t> find(std::string_view name) const;
    const AtomicProp& at(std::size_t i) const { return props_.at(i); }
    std::size_t size() const noexcept { return props_.size(); }
    const std::vector<AtomicProp>& props() const noexcept { return props_; }

private:
    std::vector<AtomicProp> props_;
};

namespace ltlf {

enum class Op { Atom, True, False, Not, And, Or, Next, Until, Eventually, Globally };

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node {
    Op op;
    std::string atom;  // Op::Atom only
    Formula lhs;       // unary operand or left operand
    Formula rhs;       // right operand of And, Or, Until
};

Formula make_atom(std::string name);
Formula make_true();
Formula make_false();
Formula make_not(Formula f);
Formula make_and(Formula a, Formula b);
Formula make_or(Formula a, Formula b);
Formula make_next(Formula f);
Formula make_until(Formula a, Formula b);
Formula make_eventually(Formula f);
Formula make_globally(Formula f);

/// Grammar (precedence unary > U > & > |, U right-associative):
///   or    := and ('|' and)*
///   and   := until ('&' until)*
///   until := unary ('U' until)?
///   unary := ('!' | 'X' | 'F' | 'G') unary | primary
///   primary := 'true' | 'false' | ident | '(' or ')'
/// Throws ParseError on malformed text and UnknownProposition when an
/// identifier is not declared in `props`.
Formula parse(std::string_view text, const PropTable& props);

/// Parse without resolving identifiers against a table.
Formula parse_unchecked(std::string_view text);

/// Fully parenthesised text that parses back to an identical tree.
std::string to_string(const Formula& f);

bool structurally_equal(const Formula& a, const Formula& b);

/// Atom names in order of first appearance (left to right).
std::vector<std::string> atoms(const Formula& f);

int depth(const Formula& f);

/// A symbol is a bitmask over an alphabet: bit i <-> alphabet[i] is true.
using Symbol = std::uint32_t;

/// Direct recursive finite-trace semantics; `word` must be nonempty.
/// Next is strong: X f is false at the last position.
bool eval_word(const Formula& f, std::span<const Symbol> word,
               const std::vector<std::string>& alphabet);

}  // namespace ltlf
}  // namespace simba
