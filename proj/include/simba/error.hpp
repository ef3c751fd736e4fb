/**
 * @file error.hpp
 * @brief Exception types shared by the planner modules.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simba {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed formula text. `position` is a 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnknownProposition : public Error {
public:
    using Error::Error;
};

/// A configured size cap (DFA states, alphabet width) was exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class BoundaryViolation : public Error {
public:
    using Error::Error;
};

/// The (pruned) automaton has no accepting run from the start state.
class InfeasibleSpecification : public Error {
public:
    using Error::Error;
};

/// Scenario validation failure. `pointer` is a JSON pointer into the file.
class ScenarioError : public Error {
public:
    ScenarioError(const std::string& pointer, const std::string& what)
        : Error(pointer + ": " + what), pointer_(pointer) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

}  // namespace simba
