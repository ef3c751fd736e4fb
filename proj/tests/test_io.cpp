#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "simba/error.hpp"
#include "simba/io.hpp"
#include "support.hpp"

using namespace simba;
using nlohmann::json;
using simba::testing::scenario_dir;
using simba::testing::toy_document;
using simba::testing::toy_scenario;

namespace {

std::string pointer_of(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ScenarioError& e) {
        return e.pointer();
    }
    return "<accepted>";
}

Solution toy_solution() {
    PlannerConfig c;
    c.seed = 3;
    c.time_limit = 30.0;
    const SolveResult r = solve(toy_scenario("G safe & F (b & F a)"), c);
    if (!r.solution) throw std::runtime_error("toy did not solve");
    return *r.solution;
}

bool same(const Solution& a, const Solution& b) {
    if (a.plan.states != b.plan.states || a.plan.controls != b.plan.controls) return false;
    if (a.beliefs.size() != b.beliefs.size()) return false;
    for (std::size_t k = 0; k < a.beliefs.size(); ++k)
        if (!(a.beliefs[k] == b.beliefs[k])) return false;
    return a.word == b.word && a.run == b.run;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Scenario, ShippedFilesLoadCleanly) {
    const Scenario sc = load_scenario(scenario_dir() + "/underwater.json");
    EXPECT_TRUE(sc.warnings.empty()) << sc.warnings.front();
    EXPECT_EQ(sc.name, "underwater");
    EXPECT_EQ(sc.system.A.rows(), 4);
    EXPECT_LT(spectral_radius(sc.system.closed_loop()), 1.0);
    for (int i = 1; i <= 5; ++i) {
        const Scenario b = load_scenario(scenario_dir() + "/bench/underwater_phi" + std::to_string(i) + ".json");
        EXPECT_TRUE(b.warnings.empty()) << i;
        EXPECT_EQ(b.system.A, sc.system.A);
    }
}

TEST(Scenario, UnstableGainPointsAtK) {
    json doc = toy_document();
    doc["system"]["K"] = json::parse("[[-0.2, 0], [0, -0.2]]");  // closed loop 1.2 I
    EXPECT_EQ(pointer_of(doc), "/system/K");
}

TEST(Scenario, UndeclaredRegion) {
    json doc = toy_document();
    doc["propositions"][0]["region"] = "nowhere";
    EXPECT_EQ(pointer_of(doc), "/propositions/0/region");
}

TEST(Scenario, MissingAndMistypedFields) {
    json doc = toy_document();
    doc["system"].erase("dt");
    EXPECT_EQ(pointer_of(doc), "/system/dt");
    doc = toy_document();
    doc["system"]["dt"] = "fast";
    EXPECT_EQ(pointer_of(doc), "/system/dt");
    doc = toy_document();
    doc["system"]["A"] = json::parse("[[1, 0, 0], [0, 1, 0]]");
    EXPECT_EQ(pointer_of(doc), "/system/A");
    doc = toy_document();
    doc["initial_belief"]["mean"] = json::parse("[20, 1]");
    EXPECT_EQ(pointer_of(doc), "/initial_belief/mean");
}

TEST(Scenario, FormulaWithUnknownProposition) {
    json doc = toy_document();
    doc["formula"] = "F z";
    EXPECT_EQ(pointer_of(doc), "/formula");
}

TEST(Scenario, NarrowRegionWarns) {
    json doc = toy_document();
    doc["regions"][0]["box"] = json::parse(R"({"lo": [6, 6], "hi": [6.5, 9]})");
    const Scenario sc = parse_scenario(doc);
    ASSERT_EQ(sc.warnings.size(), 1u);
    EXPECT_NE(sc.warnings[0].find("'a'"), std::string::npos);
}

TEST(Scenario, DisplacementBound) {
    const Scenario sc = toy_scenario("F a");
    // Single integrator: |x' - x| = |u| <= 0.5 per axis.
    EXPECT_NEAR(sc.step_displacement, std::sqrt(0.5), 1e-12);
}

TEST(Scenario, ExtendsAppliesAMergePatch) {
    const json resolved = resolve_extends(json::parse(R"({"extends": "underwater.json", "name": "x"})"),
                                          scenario_dir());
    EXPECT_EQ(resolved.at("name"), "x");
    EXPECT_FALSE(resolved.contains("extends"));
    EXPECT_EQ(resolved.at("system"), json::parse(std::ifstream(scenario_dir() + "/underwater.json")).at("system"));
    const json dropped = resolve_extends(json::parse(R"({"extends": "underwater.json", "planner": null})"),
                                         scenario_dir());
    EXPECT_FALSE(dropped.contains("planner"));
}

TEST(PlannerConfig, UnknownKeysAreErrors) {
    try {
        planner_config_from_json(json::parse(R"({"bias": 0.5, "speed": 3})"));
        FAIL();
    } catch (const ScenarioError& e) {
        EXPECT_EQ(e.pointer(), "/planner/speed");
    }
}

TEST(PlannerConfig, RoundTrip) {
    PlannerConfig c;
    c.bias = 0.25;
    c.seed = 99;
    c.initial_radius = 1.5;
    c.simba = GuideKind::Geometric;
    const PlannerConfig back = planner_config_from_json(planner_config_to_json(c));
    EXPECT_EQ(back.bias, 0.25);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.initial_radius, std::optional<double>(1.5));
    EXPECT_EQ(back.simba, GuideKind::Geometric);
    EXPECT_EQ(planner_config_to_json(back), planner_config_to_json(c));
}

TEST(Json, BeliefRoundTripIsExact) {
    Belief b = initial_belief(Vector{{0.1, 1.0 / 3.0}}, Matrix::Identity(2, 2) * 2.0 / 7.0);
    b.mean_cov(0, 1) = b.mean_cov(1, 0) = 1e-300;
    EXPECT_TRUE(belief_from_json(json::parse(to_json(b).dump())) == b);
}

TEST(Json, SolutionRoundTripIsExact) {
    const Solution s = toy_solution();
    const Scenario sc = toy_scenario("F a");
    const PropTable& props = sc.labeler.props();
    const json j = to_json(s, props);
    EXPECT_TRUE(same(solution_from_json(json::parse(j.dump()), props), s));
    // Labels are written by name.
    bool named = false;
    for (const json& l : j.at("word"))
        for (const json& p : l) named |= p == "safe";
    EXPECT_TRUE(named);
}

TEST(Json, PlanDocumentLeavesOutWallTime) {
    const Scenario sc = toy_scenario("G safe & F a");
    Solution s = toy_solution();
    const std::string d1 = plan_document(sc, sc.planner, s).dump();
    s.meta.wall_time += 5.0;
    EXPECT_EQ(plan_document(sc, sc.planner, s).dump(), d1);
}

TEST(Json, GuideRoundTrip) {
    GuidePath g;
    g.points = {Vector{{1.0, 2.0}}, Vector{{1.5, 2.25}}};
    g.states = {0, 1};
    const GuidePath back = guide_from_json(json::parse(to_json(g).dump()));
    EXPECT_EQ(back.points, g.points);
    EXPECT_EQ(back.states, g.states);
    EXPECT_EQ(lines(guide_csv(g)).size(), 3u);
}

TEST(Json, TreeSnapshotRoundTrip) {
    PlannerConfig c;
    c.seed = 1;
    c.time_limit = 30.0;
    const SolveResult r = solve(toy_scenario("G safe & F (b & F a)"), c);
    const TreeSnapshot t = snapshot(r.tree);
    ASSERT_EQ(t.nodes.size(), r.tree.size());
    const json j = to_json(t);
    EXPECT_EQ(j.at("edges").size(), t.nodes.size() - 1);
    EXPECT_TRUE(tree_from_json(json::parse(j.dump())) == t);
}

TEST(Json, EpochRecordRoundTrip) {
    EpochRecord r;
    r.epoch = 3;
    r.task_plan = {0, 2, 1};
    r.weights = {0.25, 1.0 / 3.0, 0.1};
    r.guide_found = true;
    r.guide_length = 17;
    r.radius = 0.7;
    r.belief_vertices = 40;
    r.guide_vertices = 12;
    r.state_counts = {30, 6, 4};
    r.elapsed = 0.123;
    const EpochRecord back = epoch_from_json(json::parse(to_json(r).dump()));
    EXPECT_EQ(to_json(back), to_json(r));
    EXPECT_EQ(back.weights, r.weights);
}

TEST(Csv, TrajectoryHeaderAndRows) {
    const Solution s = toy_solution();
    const Scenario sc = toy_scenario("F a");
    const auto rows = lines(trajectory_csv(s, sc.labeler.props(), 1.0));
    ASSERT_EQ(rows.size(), s.beliefs.size() + 1);
    EXPECT_EQ(rows[0], "step,time,x0,x1,sigma0,sigma1,lambda0,lambda1,labels,q");
    EXPECT_EQ(rows[1].substr(0, 4), "0,0,");
}
