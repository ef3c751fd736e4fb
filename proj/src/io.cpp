#include "simba/io.hpp"

#include <sstream>

#include "simba/error.hpp"

namespace simba {

using json = nlohmann::json;

json to_json(const Vector& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

json to_json(const Matrix& m) {
    json j = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vector(m.row(r).transpose())));
    return j;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    return v;
}

Matrix matrix_from_json(const json& j) {
    if (j.empty()) return Matrix();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j.at(0).size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != static_cast<std::size_t>(m.cols())) throw InvalidInput("ragged matrix");
        m.row(static_cast<Eigen::Index>(r)) = vector_from_json(j[r]).transpose();
    }
    return m;
}

json to_json(const Belief& b) {
    return {{"mean", to_json(b.mean)}, {"est_cov", to_json(b.est_cov)}, {"mean_cov", to_json(b.mean_cov)}};
}

Belief belief_from_json(const json& j) {
    return Belief{vector_from_json(j.at("mean")), matrix_from_json(j.at("est_cov")), matrix_from_json(j.at("mean_cov"))};
}

json to_json(const NominalPlan& plan) {
    json controls = json::array(), states = json::array();
    for (const Vector& u : plan.controls) controls.push_back(to_json(u));
    for (const Vector& x : plan.states) states.push_back(to_json(x));
    return {{"controls", controls}, {"states", states}};
}

NominalPlan plan_from_json(const json& j) {
    NominalPlan p;
    for (const json& u : j.at("controls")) p.controls.push_back(vector_from_json(u));
    for (const json& x : j.at("states")) p.states.push_back(vector_from_json(x));
    return p;
}

namespace {

json label_json(const LabelSet& l, const PropTable& props) {
    json j = json::array();
    for (const std::string& n : l.names(props)) j.push_back(n);
    return j;
}

LabelSet label_from_json(const json& j, const PropTable& props) {
    LabelSet l;
    for (const json& n : j) {
        const auto idx = props.find(n.get<std::string>());
        if (!idx) throw UnknownProposition("label mentions undeclared proposition '" + n.get<std::string>() + "'");
        l.insert(*idx);
    }
    return l;
}

json meta_json(const SolveMetadata& m) {
    return {{"epochs", m.epochs},
            {"belief_vertices", m.belief_vertices},
            {"guide_vertices", m.guide_vertices},
            {"extensions", m.extensions},
            {"guides_found", m.guides_found},
            {"pruned_label_hits", m.pruned_label_hits}};
}

SolveMetadata meta_from_json(const json& j) {
    SolveMetadata m;
    m.epochs = j.at("epochs").get<std::size_t>();
    m.belief_vertices = j.at("belief_vertices").get<std::size_t>();
    m.guide_vertices = j.at("guide_vertices").get<std::size_t>();
    m.extensions = j.at("extensions").get<std::size_t>();
    m.guides_found = j.at("guides_found").get<std::size_t>();
    m.pruned_label_hits = j.at("pruned_label_hits").get<std::size_t>();
    return m;
}

}  // namespace

json to_json(const Solution& s, const PropTable& props) {
    json beliefs = json::array(), word = json::array();
    for (const Belief& b : s.beliefs) beliefs.push_back(to_json(b));
    for (const LabelSet& l : s.word) word.push_back(label_json(l, props));
    json j = to_json(s.plan);
    j["beliefs"] = beliefs;
    j["word"] = word;
    j["run"] = s.run;
    j["meta"] = meta_json(s.meta);
    return j;
}

Solution solution_from_json(const json& j, const PropTable& props) {
    Solution s;
    s.plan = plan_from_json(j);
    for (const json& b : j.at("beliefs")) s.beliefs.push_back(belief_from_json(b));
    for (const json& l : j.at("word")) s.word.push_back(label_from_json(l, props));
    s.run = j.at("run").get<std::vector<std::size_t>>();
    s.meta = meta_from_json(j.at("meta"));
    return s;
}

json plan_document(const Scenario& scenario, const PlannerConfig& config, const Solution& s) {
    json j;
    j["scenario"] = scenario.name;
    j["formula"] = scenario.formula;
    j["seed"] = config.seed;
    j["simba"] = to_string(config.simba);
    j["solution"] = to_json(s, scenario.labeler.props());
    return j;
}

json to_json(const GuidePath& g) {
    json points = json::array();
    for (const Vector& p : g.points) points.push_back(to_json(p));
    return {{"points", points}, {"states", g.states}};
}

GuidePath guide_from_json(const json& j) {
    GuidePath g;
    for (const json& p : j.at("points")) g.points.push_back(vector_from_json(p));
    g.states = j.at("states").get<std::vector<std::size_t>>();
    if (g.points.size() != g.states.size()) throw InvalidInput("guide points and states differ in length");
    return g;
}

std::string guide_csv(const GuidePath& g) {
    std::ostringstream out;
    out.precision(17);
    const Eigen::Index k = g.empty() ? 0 : g.points.front().size();
    out << "index";
    for (Eigen::Index i = 0; i < k; ++i) out << ",p" << i;
    out << ",q\n";
    for (std::size_t r = 0; r < g.size(); ++r) {
        out << r;
        for (Eigen::Index i = 0; i < k; ++i) out << ',' << g.points[r](i);
        out << ',' << g.states[r] << '\n';
    }
    return out.str();
}

TreeSnapshot snapshot(const BeliefTree& tree) {
    TreeSnapshot t;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeVertex& v = tree.vertex(i);
        t.nodes.push_back({i, v.parent, v.q, v.depth, v.belief.mean});
    }
    return t;
}

json to_json(const TreeSnapshot& t) {
    json vertices = json::array(), edges = json::array();
    for (const TreeSnapshot::Node& n : t.nodes) {
        vertices.push_back({{"id", n.id},
                            {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                            {"q", n.q},
                            {"depth", n.depth},
                            {"mean", to_json(n.mean)}});
        if (n.parent) edges.push_back({*n.parent, n.id});
    }
    return {{"vertices", vertices}, {"edges", edges}};
}

TreeSnapshot tree_from_json(const json& j) {
    TreeSnapshot t;
    for (const json& v : j.at("vertices")) {
        TreeSnapshot::Node n;
        n.id = v.at("id").get<std::size_t>();
        if (!v.at("parent").is_null()) n.parent = v.at("parent").get<std::size_t>();
        n.q = v.at("q").get<std::size_t>();
        n.depth = v.at("depth").get<std::size_t>();
        n.mean = vector_from_json(v.at("mean"));
        t.nodes.push_back(std::move(n));
    }
    return t;
}

json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch},
            {"task_plan", r.task_plan},
            {"weights", r.weights},
            {"guide_found", r.guide_found},
            {"guide_length", r.guide_length},
            {"radius", r.radius},
            {"belief_vertices", r.belief_vertices},
            {"guide_vertices", r.guide_vertices},
            {"state_counts", r.state_counts},
            {"elapsed", r.elapsed}};
}

EpochRecord epoch_from_json(const json& j) {
    EpochRecord r;
    r.epoch = j.at("epoch").get<std::size_t>();
    r.task_plan = j.at("task_plan").get<std::vector<std::size_t>>();
    r.weights = j.at("weights").get<std::vector<double>>();
    r.guide_found = j.at("guide_found").get<bool>();
    r.guide_length = j.at("guide_length").get<std::size_t>();
    r.radius = j.at("radius").get<double>();
    r.belief_vertices = j.at("belief_vertices").get<std::size_t>();
    r.guide_vertices = j.at("guide_vertices").get<std::size_t>();
    r.state_counts = j.value("state_counts", std::vector<std::size_t>{});
    r.elapsed = j.at("elapsed").get<double>();
    return r;
}

json to_json(const ValidationReport& r) {
    json checks = json::array();
    for (const PropositionCheck& c : r.checks)
        checks.push_back({{"step", c.step},
                          {"prop", c.prop},
                          {"alpha", c.alpha},
                          {"hits", c.hits},
                          {"frequency", c.frequency},
                          {"threshold", c.threshold},
                          {"flagged", c.flagged}});
    return {{"trials", r.trials}, {"flags", r.flags()}, {"checks", checks}};
}

std::string trajectory_csv(const Solution& s, const PropTable& props, double dt) {
    std::ostringstream out;
    out.precision(17);
    const Eigen::Index n = s.beliefs.empty() ? 0 : s.beliefs.front().mean.size();
    out << "step,time";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
    for (Eigen::Index i = 0; i < n; ++i) out << ",sigma" << i;
    for (Eigen::Index i = 0; i < n; ++i) out << ",lambda" << i;
    out << ",labels,q\n";
    for (std::size_t k = 0; k < s.beliefs.size(); ++k) {
        const Belief& b = s.beliefs[k];
        out << k << ',' << static_cast<double>(k) * dt;
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << b.mean(i);
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << b.est_cov(i, i);
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << b.mean_cov(i, i);
        out << ',';
        const std::vector<std::string> names = k < s.word.size() ? s.word[k].names(props) : std::vector<std::string>{};
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? ";" : "") << names[i];
        out << ',' << (k < s.run.size() ? s.run[k] : 0) << '\n';
    }
    return out.str();
}

}  // namespace simba
