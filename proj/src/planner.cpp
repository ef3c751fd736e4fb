#include "simba/planner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "simba/error.hpp"

namespace simba {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void PlannerConfig::validate() const {
    if (!(guide_budget > 0.0) || !(belief_budget > 0.0)) throw InvalidInput("epoch budgets must be positive");
    if (!(bias >= 0.0 && bias <= 1.0)) throw InvalidInput("bias must lie in [0, 1]");
    if (initial_radius && !(*initial_radius > 0.0)) throw InvalidInput("initial radius must be positive");
    if (!(radius_growth >= 1.0)) throw InvalidInput("radius growth must be >= 1");
    if (propagation_steps < 1) throw InvalidInput("propagation steps must be >= 1");
    if (guide_iterations == 0 || belief_iterations == 0) throw InvalidInput("iteration quotas must be positive");
}

Problem prepare(const Scenario& scenario) {
    Problem p;
    const ltlf::Formula f = ltlf::parse(scenario.formula, scenario.labeler.props());
    p.dfa = compile_to_dfa(f);
    p.adjacency = build_adjacency_graph(scenario.labeler.regions(), scenario.workspace());
    p.pruned = prune_letters(p.dfa, scenario.labeler, p.adjacency);
    return p;
}

SolveResult solve(const Scenario& scenario, const PlannerConfig& config, const EpochObserver& observer) {
    config.validate();
    const Clock::time_point t0 = Clock::now();
    Problem problem = prepare(scenario);
    PrunedDfa& dfa = problem.pruned;
    const FullModel full(scenario.system, scenario.labeler);

    SolveResult result;
    result.tree = BeliefTree::rooted(full, dfa, scenario.initial_belief());
    const std::size_t root_q = result.tree.root().q;
    if (!dfa.usable(root_q)) {
        std::string msg = "no accepting run is possible from the initial belief";
        if (!dfa.blocked.empty()) msg += "; pruned letters: " + dfa.blocked.to_string(dfa.base.props());
        throw InfeasibleSpecification(msg);
    }

    SearchStats stats;
    auto finish = [&](std::size_t vertex) {
        ExtractedPlan e = extract_plan(result.tree, full, dfa, vertex);
        Solution s{std::move(e.plan), std::move(e.beliefs), std::move(e.word), std::move(e.run), {}};
        result.solution = std::move(s);
    };
    auto close = [&](const GuideLayer& guide) {
        result.meta.belief_vertices = result.tree.size();
        result.meta.guide_vertices = guide.tree.size();
        result.meta.extensions = stats.extensions + guide.stats.extensions;
        result.meta.pruned_label_hits = stats.pruned_label_hits + guide.stats.pruned_label_hits;
        result.meta.wall_time = seconds_since(t0);
        if (result.solution) result.solution->meta = result.meta;
    };

    SimplifiedModel simplified = scenario.simba;
    simplified.kind = config.simba;
    const SimplifiedMotion simple(scenario.system, scenario.labeler, simplified);
    GuideLayer guide;
    if (config.simba != GuideKind::None)
        guide.tree = BeliefTree::rooted(simple, dfa, simple.root(scenario.initial_belief()));

    if (dfa.is_accepting(root_q)) {
        finish(0);
        close(guide);
        return result;
    }
    if (!(config.time_limit > 0.0)) {
        close(guide);
        return result;
    }

    std::uint64_t seed_state = config.seed;
    std::mt19937_64 belief_rng(splitmix64(seed_state));
    std::mt19937_64 guide_rng(splitmix64(seed_state));

    const double diameter = scenario.workspace().diameter();
    double radius = std::min(config.initial_radius.value_or(2.0 * scenario.step_displacement), diameter);
    if (!(radius > 0.0)) radius = diameter;
    const Box& bounds = scenario.system.state_bounds;

    for (std::size_t epoch = 0;; ++epoch) {
        const double remaining = config.time_limit - seconds_since(t0);
        if (remaining <= 0.0) break;
        ++result.meta.epochs;

        const TaskPlan plan = plan_task(dfa, root_q);
        EpochRecord record;
        record.epoch = epoch;
        record.task_plan = plan.run;
        for (std::size_t q : plan.run) record.weights.push_back(state_weight(dfa, q));
        record.radius = radius;

        std::optional<GuidePath> path;
        if (config.simba != GuideKind::None) {
            const Budget budget{config.guide_iterations, std::min(config.guide_budget, remaining)};
            path = plan_guide(guide, simple, dfa, plan, budget, bounds, guide_rng, config.propagation_steps);
            if (path) {
                ++result.meta.guides_found;
                result.guide = path;
                record.guide_found = true;
                record.guide_length = path->size();
            }
        }

        const TargetSampler sampler = [&](std::size_t q, std::mt19937_64& rng) {
            const GuidePath segment = path ? segment_for(q, *path) : GuidePath{};
            return biased_sample(segment, radius, config.bias, bounds, simplified.projection, rng);
        };
        const Clock::time_point epoch_start = Clock::now();
        const double belief_cap = std::min(config.belief_budget, config.time_limit - seconds_since(t0));
        for (std::size_t i = 0; i < config.belief_iterations; ++i) {
            if (i % kClockCheckInterval == 0 && seconds_since(epoch_start) >= belief_cap) break;
            const std::vector<std::size_t> states = frontier(result.tree, plan);
            auto id = extend(result.tree, full, dfa, states, sampler, belief_rng, stats, config.propagation_steps);
            if (id && check_accepting(result.tree.vertex(*id), dfa)) {
                finish(*id);
                break;
            }
        }

        for (std::size_t q = 0; q < dfa.num_states(); ++q) {
            dfa.cov[q] = static_cast<long>(result.tree.count(q));
            record.state_counts.push_back(result.tree.count(q));
        }
        record.belief_vertices = result.tree.size();
        record.guide_vertices = guide.tree.size();
        record.elapsed = seconds_since(t0);
        result.epochs.push_back(record);
        if (observer) observer(record);
        if (result.solution) break;
        radius = std::min(radius * config.radius_growth, diameter);
    }
    close(guide);
    return result;
}

std::size_t ValidationReport::flags() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.flagged; }));
}

ValidationReport validate_monte_carlo(const Scenario& scenario, const NominalPlan& plan,
                                      const std::vector<LabelSet>& word, std::size_t trials, std::uint64_t seed) {
    if (word.size() != plan.states.size()) throw InvalidInput("word length must equal the number of plan states");
    const PropTable& props = scenario.labeler.props();
    const LinearGaussianSystem& sys = scenario.system;

    std::vector<std::pair<std::size_t, std::size_t>> asserted;  // (step, prop)
    for (std::size_t k = 0; k < word.size(); ++k)
        for (std::size_t i = 0; i < props.size(); ++i)
            if (word[k].contains(i)) asserted.emplace_back(k, i);
    std::vector<std::size_t> hits(asserted.size(), 0);

    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(trial_seed(seed, t));
        const Vector x0 = sample_gaussian(scenario.initial_mean, scenario.initial_cov, rng);
        const ClosedLoopTrace trace =
            simulate_closed_loop(sys, plan, x0, scenario.initial_mean, scenario.initial_cov, rng);
        for (std::size_t j = 0; j < asserted.size(); ++j) {
            const auto [k, i] = asserted[j];
            const bool inside = scenario.labeler.region_of(i).contains(sys.workspace_point(trace.true_states[k]));
            if (inside == (props.at(i).polarity == Polarity::Reach)) ++hits[j];
        }
    }

    ValidationReport report;
    report.trials = trials;
    for (std::size_t j = 0; j < asserted.size(); ++j) {
        PropositionCheck c;
        c.step = asserted[j].first;
        c.prop = props.at(asserted[j].second).name;
        c.alpha = props.at(asserted[j].second).alpha;
        c.hits = hits[j];
        if (trials > 0) {
            const double n = static_cast<double>(trials);
            c.frequency = static_cast<double>(hits[j]) / n;
            c.threshold = (1.0 - c.alpha) - 3.0 * std::sqrt(c.alpha * (1.0 - c.alpha) / n);
            c.flagged = c.frequency < c.threshold;
        }
        report.checks.push_back(std::move(c));
    }
    return report;
}

ValidationReport validate_monte_carlo(const Scenario& scenario, const Solution& solution, std::size_t trials,
                                      std::uint64_t seed) {
    return validate_monte_carlo(scenario, solution.plan, solution.word, trials, seed);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t index) {
    std::uint64_t state = master;
    std::uint64_t out = 0;
    for (std::size_t i = 0; i <= index; ++i) out = splitmix64(state);
    return out;
}

std::string variant_name(GuideKind kind) {
    switch (kind) {
        case GuideKind::None: return "no-guide";
        case GuideKind::Geometric: return "Geo-SiMBA";
        case GuideKind::Sba: return "SBA-SiMBA";
    }
    return "no-guide";
}

GuideKind parse_variant(const std::string& text) {
    if (text == "no-guide") return GuideKind::None;
    if (text == "Geo-SiMBA") return GuideKind::Geometric;
    if (text == "SBA-SiMBA") return GuideKind::Sba;
    return parse_guide_kind(text);
}

std::vector<BenchRow> run_benchmark(const std::vector<BenchCase>& cases, const std::vector<GuideKind>& variants,
                                    std::size_t trials, double limit, std::uint64_t master_seed,
                                    const std::optional<PlannerConfig>& base, unsigned threads) {
    std::vector<BenchRow> rows;
    if (trials == 0) return rows;
    struct Job {
        std::size_t row, trial;
    };
    std::vector<Job> jobs;
    for (const BenchCase& c : cases)
        for (GuideKind v : variants) {
            BenchRow row;
            row.scenario = c.name;
            row.variant = variant_name(v);
            row.trials = trials;
            for (std::size_t t = 0; t < trials; ++t) jobs.push_back({rows.size(), t});
            rows.push_back(row);
        }

    std::vector<double> times(jobs.size(), limit);
    std::vector<char> solved(jobs.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const std::size_t row = jobs[j].row;
            const BenchCase& c = cases[row / variants.size()];
            PlannerConfig cfg = base.value_or(c.scenario.planner);
            cfg.simba = variants[row % variants.size()];
            cfg.time_limit = limit;
            cfg.seed = trial_seed(master_seed, jobs[j].trial);
            try {
                const SolveResult r = solve(c.scenario, cfg);
                if (r.solution) {
                    solved[j] = 1;
                    times[j] = std::min(r.meta.wall_time, limit);
                }
            } catch (const InfeasibleSpecification&) {
            }
        }
    };
    const unsigned n = std::max(1u, threads);
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> ts;
        for (std::size_t j = 0; j < jobs.size(); ++j)
            if (jobs[j].row == r) {
                ts.push_back(times[j]);
                rows[r].successes += static_cast<std::size_t>(solved[j]);
            }
        const double n_t = static_cast<double>(ts.size());
        double mean = 0.0;
        for (double t : ts) mean += t;
        mean /= n_t;
        double var = 0.0;
        for (double t : ts) var += (t - mean) * (t - mean);
        rows[r].mean_time = mean;
        rows[r].sem = ts.size() > 1 ? std::sqrt(var / (n_t - 1.0)) / std::sqrt(n_t) : 0.0;
        rows[r].success_percent = 100.0 * static_cast<double>(rows[r].successes) / n_t;
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "scenario,variant,trials,successes,success_percent,mean_time,sem\n";
    for (const BenchRow& r : rows)
        out << r.scenario << ',' << r.variant << ',' << r.trials << ',' << r.successes << ',' << r.success_percent
            << ',' << r.mean_time << ',' << r.sem << '\n';
    return out.str();
}

}  // namespace simba
