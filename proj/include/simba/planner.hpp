/**
 * @file planner.hpp
 * @brief Epoch loop over task planning, guide search and belief search;
 *        Monte-Carlo validation and benchmarking.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "simba/scenario.hpp"

namespace simba {

/// Compiled automaton and region graph for a scenario.
struct Problem {
    Dfa dfa;
    AdjacencyGraph adjacency;
    PrunedDfa pruned;
};

Problem prepare(const Scenario& scenario);

struct SolveMetadata {
    std::size_t epochs = 0;
    std::size_t belief_vertices = 0;
    std::size_t guide_vertices = 0;
    std::size_t extensions = 0;
    std::size_t guides_found = 0;
    std::size_t pruned_label_hits = 0;
    double wall_time = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::vector<std::size_t> task_plan;
    std::vector<double> weights;  // state weight of each task-plan state
    bool guide_found = false;
    std::size_t guide_length = 0;
    double radius = 0.0;
    std::size_t belief_vertices = 0;
    std::size_t guide_vertices = 0;
    std::vector<std::size_t> state_counts;  // belief vertices per automaton state after the epoch
    double elapsed = 0.0;
};

struct Solution {
    NominalPlan plan;
    std::vector<Belief> beliefs;
    std::vector<LabelSet> word;
    std::vector<std::size_t> run;  // pruned-automaton state after each label
    SolveMetadata meta;
};

struct SolveResult {
    std::optional<Solution> solution;  // nullopt on timeout
    SolveMetadata meta;
    std::vector<EpochRecord> epochs;
    std::optional<GuidePath> guide;  // newest guide
    BeliefTree tree;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

/// Deterministic given config.seed as long as the wall-clock caps do not
/// trigger. Throws InfeasibleSpecification when the pruned automaton has no
/// accepting run from the root state.
SolveResult solve(const Scenario& scenario, const PlannerConfig& config, const EpochObserver& observer = {});

struct PropositionCheck {
    std::size_t step = 0;
    std::string prop;
    double alpha = 0.0;
    std::size_t hits = 0;
    double frequency = 0.0;
    double threshold = 0.0;  // (1 - alpha) - 3 * sqrt(alpha (1 - alpha) / trials)
    bool flagged = false;
};

struct ValidationReport {
    std::size_t trials = 0;
    std::vector<PropositionCheck> checks;

    std::size_t flags() const;
    bool passed() const { return flags() == 0; }
};

/// Closed-loop rollouts from x0 ~ N(x̌0, Σ0) with x̂0 = x̌0; every proposition
/// asserted by word[k] is checked against the true state at step k.
ValidationReport validate_monte_carlo(const Scenario& scenario, const NominalPlan& plan,
                                      const std::vector<LabelSet>& word, std::size_t trials, std::uint64_t seed);
ValidationReport validate_monte_carlo(const Scenario& scenario, const Solution& solution, std::size_t trials,
                                      std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t& state);
/// Seed of trial `index`: the (index+1)-th splitmix64 output from `master`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t index);

std::string variant_name(GuideKind kind);  // no-guide, Geo-SiMBA, SBA-SiMBA
GuideKind parse_variant(const std::string& text);

struct BenchCase {
    std::string name;
    Scenario scenario;
};

struct BenchRow {
    std::string scenario;
    std::string variant;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_percent = 0.0;
    double mean_time = 0.0;  // failures count as the limit
    double sem = 0.0;
};

/// One row per (case, variant). Trials run on `threads` workers with
/// independent planners.
std::vector<BenchRow> run_benchmark(const std::vector<BenchCase>& cases, const std::vector<GuideKind>& variants,
                                    std::size_t trials, double limit, std::uint64_t master_seed,
                                    const std::optional<PlannerConfig>& base = std::nullopt, unsigned threads = 1);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace simba
