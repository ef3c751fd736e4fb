/**
 * @file io.hpp
 * @brief JSON and CSV exports of plans, trees, guides and logs.
 *
 * Every JSON export has a matching reader with load(export(x)) == x.
 * Doubles are written in shortest round-trip form.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simba/planner.hpp"

namespace simba {

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
Vector vector_from_json(const nlohmann::json& j);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Belief& b);
Belief belief_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NominalPlan& plan);
NominalPlan plan_from_json(const nlohmann::json& j);

/// Labels are written as proposition-name lists.
nlohmann::json to_json(const Solution& s, const PropTable& props);
Solution solution_from_json(const nlohmann::json& j, const PropTable& props);

/// Plan file written by `simba plan`: scenario name, seed and the solution.
/// Wall time is left out so the file depends only on the inputs.
nlohmann::json plan_document(const Scenario& scenario, const PlannerConfig& config, const Solution& s);

nlohmann::json to_json(const GuidePath& g);
GuidePath guide_from_json(const nlohmann::json& j);
std::string guide_csv(const GuidePath& g);

struct TreeSnapshot {
    struct Node {
        std::size_t id = 0;
        std::optional<std::size_t> parent;
        std::size_t q = 0;
        std::size_t depth = 0;
        Vector mean;
        friend bool operator==(const Node&, const Node&) = default;
    };
    std::vector<Node> nodes;
    friend bool operator==(const TreeSnapshot&, const TreeSnapshot&) = default;
};

TreeSnapshot snapshot(const BeliefTree& tree);
/// {"vertices": [...], "edges": [[parent, child], ...]}
nlohmann::json to_json(const TreeSnapshot& t);
TreeSnapshot tree_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EpochRecord& r);
EpochRecord epoch_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValidationReport& r);

/// Header: step,time,x0..x{n-1},sigma0..,lambda0..,labels,q
/// (sigma / lambda are the diagonals of Σ⁺ / Λ⁺; labels are ';'-separated).
std::string trajectory_csv(const Solution& s, const PropTable& props, double dt);

}  // namespace simba
