/**
 * @file config.hpp
 * @brief Planner configuration.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "simba/guide.hpp"

namespace simba {

/// Epoch budgets are iteration quotas; the second-valued budgets and the time
/// limit are wall-clock caps checked every kClockCheckInterval extensions.
/// Runs that finish inside the caps are therefore independent of timing.
struct PlannerConfig {
    double guide_budget = 1.0;   // t1, seconds per epoch
    double belief_budget = 1.0;  // t2, seconds per epoch
    double time_limit = 120.0;   // seconds per solve
    std::size_t guide_iterations = 1000;
    std::size_t belief_iterations = 1000;
    double bias = 0.75;                   // pr
    std::optional<double> initial_radius;  // d0; default 2x the per-step displacement bound
    double radius_growth = 1.5;
    int propagation_steps = kDefaultPropagationSteps;
    std::uint64_t seed = 0;
    GuideKind simba = GuideKind::Sba;

    /// Throws InvalidInput.
    void validate() const;
};

}  // namespace simba
