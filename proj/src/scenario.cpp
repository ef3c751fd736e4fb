#include "simba/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "simba/error.hpp"

namespace simba {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
    throw ScenarioError(pointer.empty() ? "/" : pointer, what);
}

std::string child(const std::string& pointer, const std::string& key) {
    std::string escaped;
    for (char c : key) {
        if (c == '~') escaped += "~0";
        else if (c == '/') escaped += "~1";
        else escaped += c;
    }
    return pointer + "/" + escaped;
}

std::string child(const std::string& pointer, std::size_t index) { return pointer + "/" + std::to_string(index); }

const json& require(const json& obj, const std::string& pointer, const std::string& key) {
    if (!obj.is_object()) fail(pointer, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(child(pointer, key), "missing required field");
    return *it;
}

const json* optional_field(const json& obj, const std::string& pointer, const std::string& key) {
    if (!obj.is_object()) fail(pointer, "expected an object");
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& pointer) {
    if (!j.is_number()) fail(pointer, "expected a number");
    return j.get<double>();
}

std::string text(const json& j, const std::string& pointer) {
    if (!j.is_string()) fail(pointer, "expected a string");
    return j.get<std::string>();
}

Vector vector_of(const json& j, const std::string& pointer, Eigen::Index size = -1) {
    if (!j.is_array()) fail(pointer, "expected an array of numbers");
    if (size >= 0 && static_cast<Eigen::Index>(j.size()) != size)
        fail(pointer, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], child(pointer, i));
    return v;
}

/// Row-major nested arrays, or {"diag": [...]}.
Matrix matrix_of(const json& j, const std::string& pointer, Eigen::Index rows = -1, Eigen::Index cols = -1) {
    if (j.is_object()) {
        const Vector d = vector_of(require(j, pointer, "diag"), child(pointer, "diag"), rows);
        Matrix m = d.asDiagonal();
        if (cols >= 0 && m.cols() != cols) fail(pointer, "diagonal matrix must be square");
        return m;
    }
    if (!j.is_array() || j.empty()) fail(pointer, "expected a nonempty array of rows");
    if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows)
        fail(pointer, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    const Eigen::Index n_cols = cols >= 0 ? cols : static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
    Matrix m(static_cast<Eigen::Index>(j.size()), n_cols);
    for (std::size_t r = 0; r < j.size(); ++r)
        m.row(static_cast<Eigen::Index>(r)) = vector_of(j[r], child(pointer, r), n_cols).transpose();
    return m;
}

Box box_of(const json& j, const std::string& pointer, Eigen::Index dim) {
    Box b{vector_of(require(j, pointer, "lo"), child(pointer, "lo"), dim),
          vector_of(require(j, pointer, "hi"), child(pointer, "hi"), dim)};
    if ((b.lo.array() > b.hi.array()).any()) fail(pointer, "lo must not exceed hi");
    return b;
}

Polytope polytope_of(const json& j, const std::string& pointer, const std::string& name, Eigen::Index dim) {
    try {
        if (const json* box = optional_field(j, pointer, "box")) {
            const Box b = box_of(*box, child(pointer, "box"), dim);
            return Polytope::box(name, b.lo, b.hi);
        }
        if (const json* verts = optional_field(j, pointer, "vertices")) {
            if (!verts->is_array()) fail(child(pointer, "vertices"), "expected an array of points");
            std::vector<Vector> points;
            for (std::size_t i = 0; i < verts->size(); ++i)
                points.push_back(vector_of((*verts)[i], child(child(pointer, "vertices"), i), dim));
            return Polytope::from_vertices(name, points);
        }
        if (const json* hs = optional_field(j, pointer, "halfspaces")) {
            if (!hs->is_array()) fail(child(pointer, "halfspaces"), "expected an array of halfspaces");
            std::vector<Halfspace> faces;
            for (std::size_t i = 0; i < hs->size(); ++i) {
                const std::string p = child(child(pointer, "halfspaces"), i);
                faces.push_back({vector_of(require((*hs)[i], p, "normal"), child(p, "normal"), dim),
                                 number(require((*hs)[i], p, "offset"), child(p, "offset"))});
            }
            return Polytope::from_halfspaces(name, std::move(faces));
        }
    } catch (const InvalidInput& e) {
        fail(pointer, e.what());
    }
    fail(pointer, "region needs one of \"box\", \"vertices\" or \"halfspaces\"");
}

std::optional<Matrix> noise_of(const json& j, const std::string& pointer, Eigen::Index p) {
    if (j.is_string()) {
        if (j.get<std::string>() != "none") fail(pointer, "expected a matrix or \"none\"");
        return std::nullopt;
    }
    return matrix_of(j, pointer, p, p);
}

void check_psd(const Matrix& m, const std::string& pointer) {
    try {
        require_psd(m);
    } catch (const InvalidInput& e) {
        fail(pointer, e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("/", path.string() + ": " + e.what());
    }
}

json resolve_extends_depth(const json& doc, const std::filesystem::path& base_dir, int depth) {
    if (!doc.is_object() || !doc.contains("extends")) return doc;
    if (depth > 16) fail("/extends", "extends chain is too deep");
    const std::string rel = text(doc["extends"], "/extends");
    const std::filesystem::path base_path = base_dir / rel;
    json merged = resolve_extends_depth(read_json_file(base_path), base_path.parent_path(), depth + 1);
    json patch = doc;
    patch.erase("extends");
    merged.merge_patch(patch);
    return merged;
}

}  // namespace

Box Scenario::workspace() const {
    const auto& dims = system.workspace_dims;
    Box b{Vector(static_cast<Eigen::Index>(dims.size())), Vector(static_cast<Eigen::Index>(dims.size()))};
    for (std::size_t i = 0; i < dims.size(); ++i) {
        b.lo(static_cast<Eigen::Index>(i)) = system.state_bounds.lo(dims[i]);
        b.hi(static_cast<Eigen::Index>(i)) = system.state_bounds.hi(dims[i]);
    }
    return b;
}

double step_displacement_bound(const LinearGaussianSystem& sys) {
    const Eigen::Index n = sys.state_dim();
    const Matrix drift = sys.A - Matrix::Identity(n, n);
    const Vector x_max = sys.state_bounds.lo.cwiseAbs().cwiseMax(sys.state_bounds.hi.cwiseAbs());
    const Vector u_max = sys.input_bounds.lo.cwiseAbs().cwiseMax(sys.input_bounds.hi.cwiseAbs());
    Vector per_dim(static_cast<Eigen::Index>(sys.workspace_dims.size()));
    for (std::size_t i = 0; i < sys.workspace_dims.size(); ++i) {
        const int w = sys.workspace_dims[i];
        per_dim(static_cast<Eigen::Index>(i)) =
            drift.row(w).cwiseAbs().dot(x_max) + sys.B.row(w).cwiseAbs().dot(u_max);
    }
    return per_dim.norm();
}

json resolve_extends(const json& doc, const std::filesystem::path& base_dir) {
    return resolve_extends_depth(doc, base_dir, 0);
}

PlannerConfig planner_config_from_json(const json& j, PlannerConfig cfg, const std::string& pointer) {
    if (!j.is_object()) fail(pointer, "expected an object");
    static const std::set<std::string> known = {"guide_budget",   "belief_budget",   "time_limit",
                                                "guide_iterations", "belief_iterations", "bias",
                                                "initial_radius", "radius_growth",   "propagation_steps",
                                                "seed",           "simba"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) fail(child(pointer, it.key()), "unknown planner option");
    auto count = [&](const char* key, std::size_t& out) {
        if (const json* v = optional_field(j, pointer, key)) {
            if (!v->is_number_unsigned()) fail(child(pointer, key), "expected a nonnegative integer");
            out = v->get<std::size_t>();
        }
    };
    auto real = [&](const char* key, double& out) {
        if (const json* v = optional_field(j, pointer, key)) out = number(*v, child(pointer, key));
    };
    real("guide_budget", cfg.guide_budget);
    real("belief_budget", cfg.belief_budget);
    real("time_limit", cfg.time_limit);
    count("guide_iterations", cfg.guide_iterations);
    count("belief_iterations", cfg.belief_iterations);
    real("bias", cfg.bias);
    if (const json* v = optional_field(j, pointer, "initial_radius")) {
        if (v->is_null()) cfg.initial_radius.reset();
        else cfg.initial_radius = number(*v, child(pointer, "initial_radius"));
    }
    real("radius_growth", cfg.radius_growth);
    if (const json* v = optional_field(j, pointer, "propagation_steps")) {
        if (!v->is_number_integer()) fail(child(pointer, "propagation_steps"), "expected an integer");
        cfg.propagation_steps = v->get<int>();
    }
    if (const json* v = optional_field(j, pointer, "seed")) {
        if (!v->is_number_unsigned()) fail(child(pointer, "seed"), "expected a nonnegative integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = optional_field(j, pointer, "simba")) {
        try {
            cfg.simba = parse_guide_kind(text(*v, child(pointer, "simba")));
        } catch (const InvalidInput& e) {
            fail(child(pointer, "simba"), e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const InvalidInput& e) {
        fail(pointer, e.what());
    }
    return cfg;
}

json planner_config_to_json(const PlannerConfig& cfg) {
    json j;
    j["guide_budget"] = cfg.guide_budget;
    j["belief_budget"] = cfg.belief_budget;
    j["time_limit"] = cfg.time_limit;
    j["guide_iterations"] = cfg.guide_iterations;
    j["belief_iterations"] = cfg.belief_iterations;
    j["bias"] = cfg.bias;
    j["initial_radius"] = cfg.initial_radius ? json(*cfg.initial_radius) : json(nullptr);
    j["radius_growth"] = cfg.radius_growth;
    j["propagation_steps"] = cfg.propagation_steps;
    j["seed"] = cfg.seed;
    j["simba"] = to_string(cfg.simba);
    return j;
}

Scenario parse_scenario(const json& doc, const std::string& fallback_name) {
    if (!doc.is_object()) fail("", "scenario must be a JSON object");
    Scenario sc;
    sc.name = doc.contains("name") ? text(doc["name"], "/name") : fallback_name;

    // System matrices.
    const std::string sp = "/system";
    const json& sys_j = require(doc, "", "system");
    LinearGaussianSystem& sys = sc.system;
    sys.dt = number(require(sys_j, sp, "dt"), child(sp, "dt"));
    if (!(sys.dt > 0.0)) fail(child(sp, "dt"), "dt must be positive");
    sys.A = matrix_of(require(sys_j, sp, "A"), child(sp, "A"));
    const Eigen::Index n = sys.A.rows();
    if (sys.A.cols() != n) fail(child(sp, "A"), "A must be square");
    sys.B = matrix_of(require(sys_j, sp, "B"), child(sp, "B"), n);
    const Eigen::Index m = sys.B.cols();
    sys.C = matrix_of(require(sys_j, sp, "C"), child(sp, "C"), -1, n);
    const Eigen::Index p = sys.C.rows();
    if (const json* d = optional_field(sys_j, sp, "D")) sys.D = matrix_of(*d, child(sp, "D"), p, m);
    else sys.D = Matrix::Zero(p, m);
    sys.Q = matrix_of(require(sys_j, sp, "Q"), child(sp, "Q"), n, n);
    check_psd(sys.Q, child(sp, "Q"));
    sys.input_bounds = box_of(require(sys_j, sp, "input_bounds"), child(sp, "input_bounds"), m);
    sys.state_bounds = box_of(require(sys_j, sp, "state_bounds"), child(sp, "state_bounds"), n);

    const json& wd = require(sys_j, sp, "workspace_dims");
    if (!wd.is_array() || wd.empty()) fail(child(sp, "workspace_dims"), "expected a nonempty array of indices");
    for (std::size_t i = 0; i < wd.size(); ++i) {
        if (!wd[i].is_number_integer()) fail(child(child(sp, "workspace_dims"), i), "expected an integer");
        const int d = wd[i].get<int>();
        if (d < 0 || d >= n) fail(child(child(sp, "workspace_dims"), i), "state index out of range");
        sys.workspace_dims.push_back(d);
    }
    const Eigen::Index wdim = static_cast<Eigen::Index>(sys.workspace_dims.size());

    const json* k = optional_field(sys_j, sp, "K");
    const json* lqr = optional_field(sys_j, sp, "lqr");
    if (k && lqr) fail(sp, "give either \"K\" or \"lqr\", not both");
    if (k) {
        sys.K = matrix_of(*k, child(sp, "K"), m, n);
    } else if (lqr) {
        const std::string lp = child(sp, "lqr");
        const Matrix qw = matrix_of(require(*lqr, lp, "Q"), child(lp, "Q"), n, n);
        const Matrix rw = matrix_of(require(*lqr, lp, "R"), child(lp, "R"), m, m);
        check_psd(qw, child(lp, "Q"));
        check_psd(rw, child(lp, "R"));
        sys.K = dlqr(sys.A, sys.B, qw, rw);
    } else {
        fail(sp, "missing feedback gain: give \"K\" or \"lqr\"");
    }

    // Regions (workspace coordinates).
    std::vector<Polytope> regions;
    const json& regions_j = require(doc, "", "regions");
    if (!regions_j.is_array()) fail("/regions", "expected an array");
    for (std::size_t i = 0; i < regions_j.size(); ++i) {
        const std::string rp = child("/regions", i);
        const std::string name = text(require(regions_j[i], rp, "name"), child(rp, "name"));
        for (const Polytope& r : regions)
            if (r.name() == name) fail(child(rp, "name"), "duplicate region '" + name + "'");
        regions.push_back(polytope_of(regions_j[i], rp, name, wdim));
    }
    auto region_named = [&](const std::string& name) -> const Polytope* {
        for (const Polytope& r : regions)
            if (r.name() == name) return &r;
        return nullptr;
    };

    // Measurement model.
    const std::string mp = child(sp, "measurement");
    if (const json* meas = optional_field(sys_j, sp, "measurement")) {
        if (const json* dr = optional_field(*meas, mp, "default_R")) sys.default_R = noise_of(*dr, child(mp, "default_R"), p);
        if (sys.default_R) check_psd(*sys.default_R, child(mp, "default_R"));
        if (const json* zones = optional_field(*meas, mp, "zones")) {
            if (!zones->is_array()) fail(child(mp, "zones"), "expected an array");
            for (std::size_t i = 0; i < zones->size(); ++i) {
                const std::string zp = child(child(mp, "zones"), i);
                const json& z = (*zones)[i];
                MeasurementZone zone;
                zone.name = z.contains("name") ? text(z["name"], child(zp, "name")) : "zone" + std::to_string(i);
                const json& region = require(z, zp, "region");
                if (region.is_string()) {
                    const Polytope* r = region_named(region.get<std::string>());
                    if (!r) fail(child(zp, "region"), "undeclared region '" + region.get<std::string>() + "'");
                    zone.region = *r;
                } else {
                    zone.region = polytope_of(region, child(zp, "region"), zone.name, wdim);
                }
                zone.R = noise_of(require(z, zp, "R"), child(zp, "R"), p);
                if (zone.R) check_psd(*zone.R, child(zp, "R"));
                sys.zones.push_back(std::move(zone));
            }
        }
    }

    try {
        sys.validate();
    } catch (const InvalidInput& e) {
        const std::string what = e.what();
        fail(what.find("feedback gain") != std::string::npos ? child(sp, k ? "K" : "lqr") : sp, what);
    }

    // Propositions.
    PropTable props;
    const json& props_j = require(doc, "", "propositions");
    if (!props_j.is_array()) fail("/propositions", "expected an array");
    for (std::size_t i = 0; i < props_j.size(); ++i) {
        const std::string pp = child("/propositions", i);
        AtomicProp ap;
        ap.name = text(require(props_j[i], pp, "name"), child(pp, "name"));
        ap.region = text(require(props_j[i], pp, "region"), child(pp, "region"));
        if (!region_named(ap.region)) fail(child(pp, "region"), "undeclared region '" + ap.region + "'");
        if (const json* a = optional_field(props_j[i], pp, "alpha")) ap.alpha = number(*a, child(pp, "alpha"));
        if (const json* pol = optional_field(props_j[i], pp, "polarity")) {
            const std::string s = text(*pol, child(pp, "polarity"));
            if (s == "reach") ap.polarity = Polarity::Reach;
            else if (s == "avoid") ap.polarity = Polarity::Avoid;
            else fail(child(pp, "polarity"), "expected \"reach\" or \"avoid\"");
        }
        try {
            props.add(ap);
        } catch (const InvalidInput& e) {
            fail(pp, e.what());
        }
    }
    try {
        sc.labeler = Labeler(props, regions, sys.workspace_dims);
    } catch (const Error& e) {
        fail("/propositions", e.what());
    }

    sc.formula = text(require(doc, "", "formula"), "/formula");
    try {
        (void)ltlf::parse(sc.formula, props);
    } catch (const Error& e) {
        fail("/formula", e.what());
    }

    // Initial belief.
    const std::string bp = "/initial_belief";
    const json& belief_j = require(doc, "", "initial_belief");
    sc.initial_mean = vector_of(require(belief_j, bp, "mean"), child(bp, "mean"), n);
    sc.initial_cov = matrix_of(require(belief_j, bp, "cov"), child(bp, "cov"), n, n);
    check_psd(sc.initial_cov, child(bp, "cov"));
    if (!sys.state_bounds.contains(sc.initial_mean)) fail(child(bp, "mean"), "initial mean is outside the state bounds");

    // Simplified model.
    const std::string gp = "/simba";
    sc.simba.projection = sys.workspace_dims;
    sc.simba.lift_defaults = Vector::Zero(n);
    if (const json* g = optional_field(doc, "", "simba")) {
        if (const json* kind = optional_field(*g, gp, "kind")) {
            try {
                sc.simba.kind = parse_guide_kind(text(*kind, child(gp, "kind")));
            } catch (const InvalidInput& e) {
                fail(child(gp, "kind"), e.what());
            }
        }
        if (const json* proj = optional_field(*g, gp, "projection")) {
            if (!proj->is_array()) fail(child(gp, "projection"), "expected an array of indices");
            sc.simba.projection.clear();
            for (std::size_t i = 0; i < proj->size(); ++i) {
                if (!(*proj)[i].is_number_integer()) fail(child(child(gp, "projection"), i), "expected an integer");
                sc.simba.projection.push_back((*proj)[i].get<int>());
            }
        }
        sc.simba.v_max = number(require(*g, gp, "v_max"), child(gp, "v_max"));
        if (const json* lift = optional_field(*g, gp, "lift_defaults"))
            sc.simba.lift_defaults = vector_of(*lift, child(gp, "lift_defaults"), n);
    } else {
        fail(gp, "missing required field");
    }
    try {
        sc.simba.validate(n, sys.workspace_dims);
    } catch (const InvalidInput& e) {
        fail(gp, e.what());
    }

    sc.planner.simba = sc.simba.kind;
    if (const json* pl = optional_field(doc, "", "planner")) sc.planner = planner_config_from_json(*pl, sc.planner, "/planner");

    sc.step_displacement = step_displacement_bound(sys);
    double min_inradius = std::numeric_limits<double>::infinity();
    std::string narrowest;
    for (const Polytope& r : regions)
        if (r.inradius() < min_inradius) {
            min_inradius = r.inradius();
            narrowest = r.name();
        }
    if (!regions.empty() && sc.step_displacement > 0.5 * min_inradius) {
        std::ostringstream w;
        w << "per-step displacement bound " << sc.step_displacement << " exceeds half the inradius of region '"
          << narrowest << "' (" << min_inradius << "); labels between steps may be missed";
        sc.warnings.push_back(w.str());
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    const json doc = resolve_extends(read_json_file(path), path.parent_path());
    return parse_scenario(doc, path.stem().string());
}

}  // namespace simba
