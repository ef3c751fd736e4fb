/**
 * @file task_planner.hpp
 * @brief Geometric letter pruning of the task automaton, feasibility weights
 *        and accepting-run search.
 */
#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "simba/dfa.hpp"
#include "simba/geometry.hpp"

namespace simba {

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Task automaton with geometrically impossible letters removed. Pruned
/// letters lead to an added rejecting sink, so the automaton stays total.
struct PrunedDfa {
    Dfa base;
    Guard blocked;  // over base.props()
    std::vector<std::vector<Transition>> edges;
    std::size_t sink = 0;
    std::vector<std::size_t> prop_index;  // automaton bit -> proposition table index

    // Feasibility statistics, one entry per state (sink included).
    std::vector<long> cov;
    std::vector<long> numsel;
    std::vector<int> dist;  // hops to an accepting state, kUnreachable if none

    std::size_t num_states() const noexcept { return edges.size(); }
    bool is_accepting(std::size_t q) const { return q != sink && base.is_accepting(q); }
    bool usable(std::size_t q) const { return dist.at(q) != kUnreachable; }
    bool is_pruned(Symbol s) const { return blocked.eval(s); }
    std::size_t step(std::size_t q, Symbol s) const;
    Symbol symbol_of(const LabelSet& label) const;
};

/// A letter is pruned iff it asserts two Reach propositions whose regions have
/// no interior overlap while (1-a_i) + (1-a_j) > 1, or a Reach proposition
/// together with an Avoid proposition on a covering region while
/// (1-a_reach) + (1-a_avoid) > 1. Also fills `dist`.
PrunedDfa prune_letters(const Dfa& dfa, const Labeler& labeler, const AdjacencyGraph& adjacency);

/// BFS over reversed usable edges. Throws InfeasibleSpecification when the
/// automaton has no accepting state.
std::vector<int> dist_from_acc(const PrunedDfa& dfa);

/// (cov + 1) / (dist * (numsel + 1)^2); accepting states use dist = 1.
double feasibility_weight(long cov, long numsel, int dist);
double state_weight(const PrunedDfa& dfa, std::size_t q);
/// (w(q) * w(q'))^-1
double edge_weight(const PrunedDfa& dfa, std::size_t q, std::size_t q_next);

struct TaskPlan {
    std::vector<std::size_t> run;  // start .. accepting state

    bool contains(std::size_t q) const;
    /// Successor of q on the run, or q itself when q is last / absent.
    std::size_t successor(std::size_t q) const;
};

/// Minimum-weight accepting run from `start` (Dijkstra); increments numsel on
/// every state of the returned run. Throws InfeasibleSpecification when no
/// accepting state is reachable.
TaskPlan plan_task(PrunedDfa& dfa, std::size_t start);

std::string export_dot(const PrunedDfa& dfa);

}  // namespace simba
