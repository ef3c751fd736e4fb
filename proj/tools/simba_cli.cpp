// Command-line front end: compile, plan, validate, bench.
//
// Exit codes: 0 success, 1 no solution / timeout / validation flags,
// 2 usage or input error, 3 infeasible specification.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simba/error.hpp"
#include "simba/io.hpp"
#include "simba/planner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace simba;

namespace {

constexpr int kOk = 0;
constexpr int kNoSolution = 1;
constexpr int kUsage = 2;
constexpr int kInfeasible = 3;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << text;
}

json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return json::parse(in);
}

PropTable props_from_file(const std::string& path) {
    const json doc = read_file(path);
    const json& list = doc.is_object() ? doc.at("propositions") : doc;
    PropTable props;
    for (const json& p : list) {
        AtomicProp ap;
        ap.name = p.at("name").get<std::string>();
        ap.region = p.value("region", ap.name);
        ap.alpha = p.value("alpha", 0.05);
        ap.polarity = p.value("polarity", std::string("reach")) == "avoid" ? Polarity::Avoid : Polarity::Reach;
        props.add(ap);
    }
    return props;
}

// Scenario defaults, then $SIMBA_CONFIG, then --config.
PlannerConfig layered_config(const Scenario& sc, const std::string& config_path) {
    PlannerConfig cfg = sc.planner;
    if (const char* env = std::getenv("SIMBA_CONFIG"); env && *env)
        cfg = planner_config_from_json(read_file(env), cfg, std::string(env) + "#");
    if (!config_path.empty()) cfg = planner_config_from_json(read_file(config_path), cfg, config_path + "#");
    return cfg;
}

void print_warnings(const Scenario& sc) {
    for (const std::string& w : sc.warnings) std::cerr << "warning: " << w << '\n';
}

struct CompileArgs {
    std::string formula, props, dot;
    std::size_t max_states = 10000;
};

int run_compile(const CompileArgs& a) {
    ltlf::Formula f;
    CompileOptions opt;
    opt.max_states = a.max_states;
    if (!a.props.empty()) {
        const PropTable props = props_from_file(a.props);
        f = ltlf::parse(a.formula, props);
    } else {
        f = ltlf::parse_unchecked(a.formula);
    }
    const Dfa dfa = compile_to_dfa(f, opt);
    if (!a.dot.empty()) write_file(a.dot, export_dot(dfa));
    std::vector<std::size_t> accepting;
    for (std::size_t q = 0; q < dfa.num_states(); ++q)
        if (dfa.is_accepting(q)) accepting.push_back(q);
    const json summary = {{"formula", ltlf::to_string(f)},
                          {"props", dfa.props()},
                          {"states", dfa.num_states()},
                          {"transitions", dfa.num_transitions()},
                          {"initial", dfa.initial()},
                          {"accepting", accepting}};
    std::cout << summary.dump(2) << '\n';
    return kOk;
}

struct PlanArgs {
    std::string scenario, config, out, tree_out, guide_out, csv, log_json, pruned_dot;
    std::optional<std::uint64_t> seed;
    std::optional<double> time_limit;
    std::optional<std::string> simba;
};

int run_plan(const PlanArgs& a) {
    const Scenario sc = load_scenario(a.scenario);
    print_warnings(sc);
    PlannerConfig cfg = layered_config(sc, a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.time_limit) cfg.time_limit = *a.time_limit;
    if (a.simba) cfg.simba = parse_guide_kind(*a.simba);

    if (!a.pruned_dot.empty()) write_file(a.pruned_dot, export_dot(prepare(sc).pruned));

    std::optional<std::ofstream> log_file;
    std::ostream* log = nullptr;
    if (a.log_json == "-") {
        log = &std::cerr;
    } else if (!a.log_json.empty()) {
        log_file.emplace(a.log_json);
        log = &*log_file;
    }
    const SolveResult r = solve(sc, cfg, [&](const EpochRecord& rec) {
        if (log) *log << to_json(rec).dump() << '\n';
    });

    if (!a.tree_out.empty()) write_file(a.tree_out, to_json(snapshot(r.tree)).dump() + "\n");
    if (!a.guide_out.empty() && r.guide) write_file(a.guide_out, to_json(*r.guide).dump(2) + "\n");
    if (!r.solution) {
        std::cerr << "no solution within " << cfg.time_limit << " s (" << r.meta.epochs << " epochs, "
                  << r.meta.belief_vertices << " belief vertices)\n";
        return kNoSolution;
    }
    const std::string doc = plan_document(sc, cfg, *r.solution).dump(2) + "\n";
    if (a.out.empty()) std::cout << doc;
    else write_file(a.out, doc);
    if (!a.csv.empty()) write_file(a.csv, trajectory_csv(*r.solution, sc.labeler.props(), sc.system.dt));
    std::cerr << "solved: " << r.solution->plan.controls.size() << " steps, " << r.meta.epochs << " epochs, "
              << r.meta.wall_time << " s\n";
    return kOk;
}

struct ValidateArgs {
    std::string scenario, plan, out;
    std::size_t trials = 500;
    std::uint64_t seed = 0;
};

int run_validate(const ValidateArgs& a) {
    const Scenario sc = load_scenario(a.scenario);
    print_warnings(sc);
    const json doc = read_file(a.plan);
    const Solution s = solution_from_json(doc.contains("solution") ? doc.at("solution") : doc, sc.labeler.props());
    const ValidationReport report = validate_monte_carlo(sc, s, a.trials, a.seed);
    const std::string text = to_json(report).dump(2) + "\n";
    if (a.out.empty()) std::cout << text;
    else write_file(a.out, text);
    std::cerr << report.flags() << " flagged of " << report.checks.size() << " checks over " << a.trials
              << " trials\n";
    return report.passed() ? kOk : kNoSolution;
}

struct BenchArgs {
    std::string dir, csv, config;
    std::vector<std::string> variants{"no-guide", "Geo-SiMBA", "SBA-SiMBA"};
    std::size_t trials = 20;
    double limit = 120.0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

int run_bench(const BenchArgs& a) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InvalidInput("no scenario files in '" + a.dir + "'");

    std::vector<BenchCase> cases;
    for (const fs::path& f : files) {
        Scenario sc = load_scenario(f);
        print_warnings(sc);
        if (!a.config.empty()) sc.planner = planner_config_from_json(read_file(a.config), sc.planner, a.config + "#");
        cases.push_back({f.stem().string(), std::move(sc)});
    }
    std::vector<GuideKind> variants;
    for (const std::string& v : a.variants) variants.push_back(parse_variant(v));

    const std::vector<BenchRow> rows = run_benchmark(cases, variants, a.trials, a.limit, a.seed, std::nullopt, a.threads);
    const std::string csv = bench_csv(rows);
    if (a.csv.empty()) std::cout << csv;
    else write_file(a.csv, csv);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Belief-space planning for LTLf tasks with simplified-model guides"};
    app.require_subcommand(1);

    CompileArgs compile_args;
    auto* compile = app.add_subcommand("compile", "Compile a formula to a minimal DFA");
    compile->add_option("formula", compile_args.formula, "LTLf formula")->required();
    compile->add_option("--props", compile_args.props, "JSON proposition list (or a scenario file)");
    compile->add_option("--dot", compile_args.dot, "Write the automaton as DOT");
    compile->add_option("--max-states", compile_args.max_states, "State cap");

    PlanArgs plan_args;
    auto* plan = app.add_subcommand("plan", "Plan for a scenario");
    plan->add_option("scenario", plan_args.scenario, "Scenario JSON")->required();
    plan->add_option("--seed", plan_args.seed, "RNG seed");
    plan->add_option("--time-limit", plan_args.time_limit, "Time limit in seconds");
    plan->add_option("--simba", plan_args.simba, "Guide model: sba, geo or none");
    plan->add_option("--config", plan_args.config, "Planner options JSON (overrides $SIMBA_CONFIG)");
    plan->add_option("--out", plan_args.out, "Plan JSON (default: stdout)");
    plan->add_option("--tree-out", plan_args.tree_out, "Belief tree snapshot JSON");
    plan->add_option("--guide-out", plan_args.guide_out, "Newest guide path JSON");
    plan->add_option("--csv", plan_args.csv, "Trajectory CSV");
    plan->add_option("--log-json", plan_args.log_json, "Epoch log as JSON lines ('-' for stderr)");
    plan->add_option("--dump-pruned-dot", plan_args.pruned_dot, "Pruned automaton as DOT");

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "Monte-Carlo check of a plan");
    validate->add_option("scenario", validate_args.scenario, "Scenario JSON")->required();
    validate->add_option("plan", validate_args.plan, "Plan JSON from `plan`")->required();
    validate->add_option("--trials", validate_args.trials, "Rollouts");
    validate->add_option("--seed", validate_args.seed, "RNG seed");
    validate->add_option("--out", validate_args.out, "Report JSON (default: stdout)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Benchmark guide variants over a scenario directory");
    bench->add_option("dir", bench_args.dir, "Directory of scenario JSON files")->required();
    bench->add_option("--variants", bench_args.variants, "no-guide, Geo-SiMBA, SBA-SiMBA (or none, geo, sba)");
    bench->add_option("--trials", bench_args.trials, "Trials per scenario and variant");
    bench->add_option("--limit", bench_args.limit, "Time limit per trial in seconds");
    bench->add_option("--seed", bench_args.seed, "Master seed");
    bench->add_option("--threads", bench_args.threads, "Worker threads");
    bench->add_option("--config", bench_args.config, "Planner options JSON");
    bench->add_option("--csv", bench_args.csv, "Results CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*compile) return run_compile(compile_args);
        if (*plan) return run_plan(plan_args);
        if (*validate) return run_validate(validate_args);
        if (*bench) return run_bench(bench_args);
    } catch (const InfeasibleSpecification& e) {
        std::cerr << "infeasible specification: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
