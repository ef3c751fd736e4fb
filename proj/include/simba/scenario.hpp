/**
 * @file scenario.hpp
 * @brief Scenario files: schema validation and loading.
 */
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "simba/config.hpp"

namespace simba {

struct Scenario {
    std::string name;
    LinearGaussianSystem system;
    Labeler labeler;
    std::string formula;
    Vector initial_mean;
    Matrix initial_cov;
    SimplifiedModel simba;
    PlannerConfig planner;
    /// Bound on the workspace displacement of one nominal step.
    double step_displacement = 0.0;
    std::vector<std::string> warnings;

    Belief initial_belief() const { return simba::initial_belief(initial_mean, initial_cov); }
    Box workspace() const;
};

/// Reads `path`, resolves "extends" chains (merge patch of the file onto its
/// base, relative paths against the including file) and validates.
/// Throws ScenarioError (with JSON pointer), InvalidInput, UnknownProposition
/// or ParseError.
Scenario load_scenario(const std::filesystem::path& path);

/// Validates an already-resolved document.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& fallback_name = "scenario");

/// Returns `doc` with its "extends" chain applied.
nlohmann::json resolve_extends(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads planner overrides on top of `defaults`; unknown keys are errors.
PlannerConfig planner_config_from_json(const nlohmann::json& j, PlannerConfig defaults = {},
                                       const std::string& pointer = "/planner");
nlohmann::json planner_config_to_json(const PlannerConfig& config);

/// Bound on |W (x' - x)| over the state and input boxes, where W selects the
/// workspace coordinates (row-wise absolute sums, then the Euclidean norm).
double step_displacement_bound(const LinearGaussianSystem& sys);

}  // namespace simba
