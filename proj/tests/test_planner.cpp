#include <gtest/gtest.h>

#include "simba/error.hpp"
#include "simba/planner.hpp"
#include "support.hpp"

using namespace simba;
using simba::testing::oracle_accepts;
using simba::testing::toy_scenario;

namespace {

PlannerConfig quick(std::uint64_t seed, GuideKind kind = GuideKind::Sba) {
    PlannerConfig c;
    c.seed = seed;
    c.simba = kind;
    c.time_limit = 30.0;
    return c;
}

Scenario underwater(int phi) {
    return load_scenario(simba::testing::scenario_dir() + "/bench/underwater_phi" + std::to_string(phi) + ".json");
}

std::vector<Symbol> symbols(const PrunedDfa& d, const std::vector<LabelSet>& word) {
    std::vector<Symbol> out;
    for (const LabelSet& l : word) out.push_back(d.symbol_of(l));
    return out;
}

bool same_plan(const NominalPlan& a, const NominalPlan& b) {
    if (a.states.size() != b.states.size() || a.controls.size() != b.controls.size()) return false;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        if (a.states[k] != b.states[k]) return false;
    for (std::size_t k = 0; k < a.controls.size(); ++k)
        if (a.controls[k] != b.controls[k]) return false;
    return true;
}

}  // namespace

TEST(Solve, FalseIsInfeasible) {
    EXPECT_THROW(solve(toy_scenario("false"), quick(0)), InfeasibleSpecification);
}

TEST(Solve, ZeroTimeLimitIsATimeout) {
    PlannerConfig c = quick(0);
    c.time_limit = 0.0;
    const SolveResult r = solve(toy_scenario("G safe & F a"), c);
    EXPECT_FALSE(r.solution);
    EXPECT_EQ(r.meta.epochs, 0u);
}

TEST(Solve, RootAcceptingIsAnEmptyPlan) {
    Scenario sc = toy_scenario("F a");
    sc.initial_mean = Vector{{7.5, 7.5}};
    const SolveResult r = solve(sc, quick(0));
    ASSERT_TRUE(r.solution);
    EXPECT_TRUE(r.solution->plan.controls.empty());
    EXPECT_EQ(r.meta.epochs, 0u);
}

TEST(Solve, SameSeedSameSolution) {
    const Scenario sc = toy_scenario("G safe & F (b & F a)");
    const SolveResult r1 = solve(sc, quick(11));
    const SolveResult r2 = solve(sc, quick(11));
    ASSERT_TRUE(r1.solution);
    ASSERT_TRUE(r2.solution);
    EXPECT_TRUE(same_plan(r1.solution->plan, r2.solution->plan));
    EXPECT_EQ(r1.solution->run, r2.solution->run);
    EXPECT_EQ(r1.meta.belief_vertices, r2.meta.belief_vertices);
    EXPECT_EQ(r1.meta.epochs, r2.meta.epochs);
}

TEST(Solve, SolutionIsSound) {
    for (const char* f : {"G safe & F a", "G safe & F (b & F a)", "F (a & X F b)"}) {
        const Scenario sc = toy_scenario(f);
        const Problem pb = prepare(sc);
        const SolveResult r = solve(sc, quick(3));
        ASSERT_TRUE(r.solution) << f;
        const Solution& s = *r.solution;
        ASSERT_EQ(s.beliefs.size(), s.plan.states.size());
        ASSERT_EQ(s.word.size(), s.beliefs.size());
        for (std::size_t k = 0; k < s.beliefs.size(); ++k) {
            EXPECT_TRUE(s.beliefs[k].mean == s.plan.states[k]);
            EXPECT_TRUE(sc.labeler.label(s.beliefs[k].mean, s.beliefs[k].total_cov()) == s.word[k]) << f << " k" << k;
        }
        const std::vector<Symbol> w = symbols(pb.pruned, s.word);
        EXPECT_TRUE(pb.dfa.accepts(w)) << f;
        EXPECT_TRUE(oracle_accepts(ltlf::parse(f, sc.labeler.props()), w, pb.dfa.props())) << f;
        for (std::size_t k = 0; k < s.plan.controls.size(); ++k) {
            const Vector next = sc.system.A * s.plan.states[k] + sc.system.B * s.plan.controls[k];
            EXPECT_LT((next - s.plan.states[k + 1]).norm(), 1e-9);
            EXPECT_TRUE(sc.system.input_bounds.contains(s.plan.controls[k]));
        }
    }
}

TEST(Solve, WeightsFollowTreeGrowthAndSelections) {
    Scenario sc = toy_scenario("G safe & F (b & F a)");
    PlannerConfig c = quick(5);
    c.belief_iterations = 4;  // many short epochs
    c.guide_iterations = 4;
    const Problem pb = prepare(sc);
    std::vector<long> numsel(pb.pruned.num_states(), 0);
    std::vector<std::size_t> counts(pb.pruned.num_states(), 0);
    std::size_t seen = 0;
    const SolveResult r = solve(sc, c, [&](const EpochRecord& rec) {
        ASSERT_EQ(rec.epoch, seen++);
        ASSERT_EQ(rec.weights.size(), rec.task_plan.size());
        for (std::size_t q : rec.task_plan) ++numsel[q];
        for (std::size_t i = 0; i < rec.task_plan.size(); ++i) {
            const std::size_t q = rec.task_plan[i];
            const int dist = pb.pruned.is_accepting(q) ? 1 : pb.pruned.dist[q];
            const double sel = static_cast<double>(numsel[q]) + 1.0;
            const double expected = (static_cast<double>(counts[q]) + 1.0) / (dist * sel * sel);
            EXPECT_DOUBLE_EQ(rec.weights[i], expected) << "epoch " << rec.epoch << " q" << q;
        }
        ASSERT_EQ(rec.state_counts.size(), counts.size());
        std::size_t total = 0;
        for (std::size_t n : rec.state_counts) total += n;
        EXPECT_EQ(total, rec.belief_vertices);
        counts = rec.state_counts;
    });
    EXPECT_EQ(seen, r.epochs.size());
    EXPECT_GT(seen, 1u);
    for (std::size_t q = 0; q < counts.size(); ++q) EXPECT_EQ(counts[q], r.tree.count(q));
}

TEST(Solve, RadiusGrowsPerEpoch) {
    Scenario sc = toy_scenario("G safe & F (b & F a)");
    PlannerConfig c = quick(5);
    c.belief_iterations = 4;
    c.guide_iterations = 4;
    const SolveResult r = solve(sc, c);
    ASSERT_GT(r.epochs.size(), 2u);
    EXPECT_DOUBLE_EQ(r.epochs[0].radius, std::min(2.0 * sc.step_displacement, sc.workspace().diameter()));
    for (std::size_t e = 1; e < r.epochs.size(); ++e)
        EXPECT_DOUBLE_EQ(r.epochs[e].radius, std::min(r.epochs[e - 1].radius * 1.5, sc.workspace().diameter()));
}

TEST(Solve, UnusedGuideStillSolves) {
    for (GuideKind k : {GuideKind::None, GuideKind::Geometric, GuideKind::Sba}) {
        const SolveResult r = solve(toy_scenario("G safe & F a"), quick(2, k));
        EXPECT_TRUE(r.solution) << to_string(k);
        if (k == GuideKind::None) EXPECT_EQ(r.meta.guide_vertices, 0u);
    }
}

TEST(Solve, UnderwaterEventuallyAEndsInA) {
    const Scenario sc = underwater(1);
    const SolveResult r = solve(sc, quick(1));
    ASSERT_TRUE(r.solution);
    const std::size_t a = *sc.labeler.props().find("a");
    EXPECT_TRUE(r.solution->word.back().contains(a));
    EXPECT_EQ(r.meta.pruned_label_hits, 0u);
}

TEST(Validate, NoiselessRolloutsHitEveryAssertion) {
    Scenario sc = toy_scenario("G safe & F a");
    const SolveResult r = solve(sc, quick(4));
    ASSERT_TRUE(r.solution);
    Scenario quiet = sc;
    quiet.system.Q.setZero();
    quiet.initial_cov.setZero();  // zero prior: the filter ignores measurements and tracks exactly
    const ValidationReport rep = validate_monte_carlo(quiet, *r.solution, 50, 1);
    ASSERT_FALSE(rep.checks.empty());
    for (const PropositionCheck& c : rep.checks) EXPECT_DOUBLE_EQ(c.frequency, 1.0) << c.prop << " @" << c.step;
    EXPECT_TRUE(rep.passed());
}

TEST(Validate, DriftingPlanIsFlagged) {
    Scenario sc = toy_scenario("G safe & F a");
    const SolveResult r = solve(sc, quick(4));
    ASSERT_TRUE(r.solution);
    Solution broken = *r.solution;
    // Stand still at the start while the word still claims the goal.
    for (Vector& u : broken.plan.controls) u.setZero();
    for (Vector& x : broken.plan.states) x = broken.plan.states.front();
    const ValidationReport rep = validate_monte_carlo(sc, broken, 100, 1);
    EXPECT_GT(rep.flags(), 0u);
}

TEST(Validate, ThresholdFormula) {
    const SolveResult r = solve(toy_scenario("G safe & F a"), quick(4));
    ASSERT_TRUE(r.solution);
    const ValidationReport rep = validate_monte_carlo(toy_scenario("G safe & F a"), *r.solution, 400, 9);
    for (const PropositionCheck& c : rep.checks)
        EXPECT_DOUBLE_EQ(c.threshold, 0.95 - 3.0 * std::sqrt(0.05 * 0.95 / 400.0));
}

TEST(Validate, WordLengthMustMatch) {
    const Scenario sc = toy_scenario("F a");
    NominalPlan plan;
    plan.states.push_back(sc.initial_mean);
    EXPECT_THROW(validate_monte_carlo(sc, plan, {}, 1, 0), InvalidInput);
}

TEST(Seeds, TrialSeedsAreSplitmixOutputs) {
    std::uint64_t state = 42;
    const std::uint64_t first = splitmix64(state);
    const std::uint64_t second = splitmix64(state);
    EXPECT_EQ(trial_seed(42, 0), first);
    EXPECT_EQ(trial_seed(42, 1), second);
    // Reference output of the standard splitmix64 generator seeded with 0.
    std::uint64_t zero = 0;
    EXPECT_EQ(splitmix64(zero), 0xE220A8397B1DCDAFull);
}

TEST(Bench, ZeroTrialsGiveNoRows) {
    const std::vector<BenchCase> cases{{"toy", toy_scenario("F a")}};
    EXPECT_TRUE(run_benchmark(cases, {GuideKind::Sba}, 0, 1.0, 0).empty());
    EXPECT_EQ(bench_csv({}), "scenario,variant,trials,successes,success_percent,mean_time,sem\n");
}

TEST(Bench, RowsPerCaseAndVariant) {
    const std::vector<BenchCase> cases{{"toy", toy_scenario("G safe & F a")}};
    const auto rows = run_benchmark(cases, {GuideKind::None, GuideKind::Sba}, 3, 20.0, 7, std::nullopt, 2);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].variant, "no-guide");
    EXPECT_EQ(rows[1].variant, "SBA-SiMBA");
    for (const BenchRow& r : rows) {
        EXPECT_EQ(r.trials, 3u);
        EXPECT_EQ(r.successes, 3u);
        EXPECT_DOUBLE_EQ(r.success_percent, 100.0);
        EXPECT_GE(r.sem, 0.0);
    }
}

TEST(Bench, VariantNames) {
    for (GuideKind k : {GuideKind::None, GuideKind::Geometric, GuideKind::Sba})
        EXPECT_EQ(parse_variant(variant_name(k)), k);
}

TEST(Config, RejectsBadValues) {
    PlannerConfig c;
    c.bias = 1.5;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = PlannerConfig{};
    c.radius_growth = 0.5;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = PlannerConfig{};
    c.belief_iterations = 0;
    EXPECT_THROW(c.validate(), InvalidInput);
}
