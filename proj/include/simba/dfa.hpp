/**
 * @file dfa.hpp
 * @brief Minimized total DFA with symbolic guards, compiled from LTLf.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simba/ltlf.hpp"

namespace simba {

using ltlf::Symbol;

/// Conjunction of literals: a symbol s matches iff (s & care) == value.
struct Cube {
    std::uint32_t care = 0;
    std::uint32_t value = 0;

    bool matches(Symbol s) const noexcept { return (s & care) == value; }
    friend bool operator==(const Cube&, const Cube&) = default;
};

/// Boolean formula over the alphabet in sum-of-products form.
class Guard {
public:
    Guard() = default;
    explicit Guard(std::vector<Cube> cubes) : cubes_(std::move(cubes)) {}

    static Guard always() { return Guard({Cube{}}); }
    static Guard never() { return Guard(); }
    /// Prime-implicant cover of an explicit symbol set.
    static Guard from_symbols(std::span<const Symbol> symbols, std::size_t num_props);

    bool eval(Symbol s) const noexcept;
    bool empty() const noexcept { return cubes_.empty(); }
    const std::vector<Cube>& cubes() const noexcept { return cubes_; }

    /// Symbols (out of 2^num_props) that satisfy the guard, ascending.
    std::vector<Symbol> symbols(std::size_t num_props) const;

    Guard operator|(const Guard& other) const;
    /// this & !other
    Guard minus(const Guard& other) const;

    std::string to_string(const std::vector<std::string>& props) const;

private:
    std::vector<Cube> cubes_;
};

struct Transition {
    Guard guard;
    std::size_t target;
};

/// Deterministic, total automaton. Reads one symbol per word position,
/// starting from `initial`; a word is accepted iff the state reached after
/// its last symbol is accepting.
class Dfa {
public:
    Dfa() = default;

    /// table[q][s] = successor of q on symbol s, for s in [0, 2^props.size()).
    static Dfa from_table(std::vector<std::string> props, std::size_t initial,
                          std::vector<bool> accepting,
                          const std::vector<std::vector<std::size_t>>& table);

    const std::vector<std::string>& props() const noexcept { return props_; }
    std::size_t num_states() const noexcept { return accepting_.size(); }
    std::size_t initial() const noexcept { return initial_; }
    bool is_accepting(std::size_t q) const { return accepting_.at(q); }
    const std::vector<bool>& accepting() const noexcept { return accepting_; }
    const std::vector<Transition>& transitions(std::size_t q) const { return transitions_.at(q); }
    std::size_t num_transitions() const;

    std::size_t step(std::size_t q, Symbol s) const;
    std::size_t run(std::span<const Symbol> word) const;
    bool accepts(std::span<const Symbol> word) const { return is_accepting(run(word)); }

    /// Explicit successor table (exponential in the alphabet).
    std::vector<std::vector<std::size_t>> table() const;

private:
    std::vector<std::string> props_;
    std::size_t initial_ = 0;
    std::vector<bool> accepting_;
    std::vector<std::vector<Transition>> transitions_;
};

struct CompileOptions {
    std::size_t max_states = 10000;
    std::size_t max_props = 16;
    /// Alphabet order; defaults to the formula's atoms in order of appearance.
    /// May list extra propositions that the formula does not mention.
    std::vector<std::string> alphabet;
};

/// Builds the minimal total DFA accepting exactly the nonempty finite words
/// that satisfy `f`. Throws ResourceError when a cap is exceeded.
Dfa compile_to_dfa(const ltlf::Formula& f, const CompileOptions& options = {});

/// Hopcroft partition refinement; also drops unreachable states.
Dfa minimize(const Dfa& dfa);

std::string export_dot(const Dfa& dfa, const std::string& graph_name = "dfa");

}  // namespace simba
