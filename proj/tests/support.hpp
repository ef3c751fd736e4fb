#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "simba/dfa.hpp"
#include "simba/geometry.hpp"
#include "simba/ltlf.hpp"
#include "simba/scenario.hpp"

namespace simba::testing {

// Bottom-up finite-trace evaluation over all positions at once. Kept apart
// from the library evaluator on purpose: this is the reference.
inline std::vector<bool> truth_table(const ltlf::Formula& f, const std::vector<Symbol>& word,
                                     const std::vector<std::string>& alphabet) {
    const std::size_t n = word.size();
    std::vector<bool> v(n, false);
    using ltlf::Op;
    switch (f->op) {
        case Op::True: v.assign(n, true); break;
        case Op::False: break;
        case Op::Atom: {
            std::size_t bit = alphabet.size();
            for (std::size_t i = 0; i < alphabet.size(); ++i)
                if (alphabet[i] == f->atom) bit = i;
            for (std::size_t i = 0; i < n && bit < alphabet.size(); ++i) v[i] = (word[i] >> bit) & 1u;
            break;
        }
        case Op::Not: {
            const auto a = truth_table(f->lhs, word, alphabet);
            for (std::size_t i = 0; i < n; ++i) v[i] = !a[i];
            break;
        }
        case Op::And:
        case Op::Or: {
            const auto a = truth_table(f->lhs, word, alphabet);
            const auto b = truth_table(f->rhs, word, alphabet);
            for (std::size_t i = 0; i < n; ++i) v[i] = f->op == Op::And ? (a[i] && b[i]) : (a[i] || b[i]);
            break;
        }
        case Op::Next: {
            const auto a = truth_table(f->lhs, word, alphabet);
            for (std::size_t i = 0; i + 1 < n; ++i) v[i] = a[i + 1];
            break;
        }
        case Op::Until: {
            const auto a = truth_table(f->lhs, word, alphabet);
            const auto b = truth_table(f->rhs, word, alphabet);
            for (std::size_t i = n; i-- > 0;) v[i] = b[i] || (a[i] && i + 1 < n && v[i + 1]);
            break;
        }
        case Op::Eventually: {
            const auto a = truth_table(f->lhs, word, alphabet);
            for (std::size_t i = n; i-- > 0;) v[i] = a[i] || (i + 1 < n && v[i + 1]);
            break;
        }
        case Op::Globally: {
            const auto a = truth_table(f->lhs, word, alphabet);
            for (std::size_t i = n; i-- > 0;) v[i] = a[i] && (i + 1 >= n || v[i + 1]);
            break;
        }
    }
    return v;
}

inline bool oracle_accepts(const ltlf::Formula& f, const std::vector<Symbol>& word,
                           const std::vector<std::string>& alphabet) {
    return !word.empty() && truth_table(f, word, alphabet).front();
}

inline ltlf::Formula random_formula(std::mt19937_64& rng, int depth, const std::vector<std::string>& props) {
    std::uniform_int_distribution<int> pick_prop(0, static_cast<int>(props.size()) - 1);
    if (depth <= 1) {
        std::uniform_int_distribution<int> leaf(0, 9);
        const int r = leaf(rng);
        if (r == 0) return ltlf::make_true();
        if (r == 1) return ltlf::make_false();
        return ltlf::make_atom(props[static_cast<std::size_t>(pick_prop(rng))]);
    }
    std::uniform_int_distribution<int> op(0, 8);
    const auto sub = [&] { return random_formula(rng, std::uniform_int_distribution<int>(1, depth - 1)(rng), props); };
    switch (op(rng)) {
        case 0: return ltlf::make_not(sub());
        case 1: return ltlf::make_and(sub(), sub());
        case 2: return ltlf::make_or(sub(), sub());
        case 3: return ltlf::make_next(sub());
        case 4: return ltlf::make_until(sub(), sub());
        case 5: return ltlf::make_eventually(sub());
        case 6: return ltlf::make_globally(sub());
        default: return ltlf::make_atom(props[static_cast<std::size_t>(pick_prop(rng))]);
    }
}

/// Number of words of length 1..max_len on which the DFA and the oracle differ.
inline std::size_t count_mismatches(const ltlf::Formula& f, const Dfa& dfa, std::size_t max_len) {
    const std::vector<std::string>& alphabet = dfa.props();
    const Symbol letters = Symbol{1} << alphabet.size();
    std::size_t bad = 0;
    std::vector<Symbol> word;
    std::vector<std::size_t> states{dfa.initial()};
    // Depth-first over words, sharing automaton prefixes.
    const auto walk = [&](auto&& self) -> void {
        if (!word.empty() && dfa.is_accepting(states.back()) != oracle_accepts(f, word, alphabet)) ++bad;
        if (word.size() == max_len) return;
        for (Symbol s = 0; s < letters; ++s) {
            word.push_back(s);
            states.push_back(dfa.step(states.back(), s));
            self(self);
            word.pop_back();
            states.pop_back();
        }
    };
    walk(walk);
    return bad;
}

/// Random convex polygon (hull of 3..7 points in a 4x4 box around the origin),
/// a mean within 3 units of it and a random covariance with eigenvalues in
/// about [0.005, 2].
struct ChanceCase {
    Polytope region;
    Vector mean;
    Matrix cov;
};

inline ChanceCase random_chance_case(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0), m(-3.0, 3.0), e(-2.3, 0.35), ang(0.0, 6.283185307179586);
    std::uniform_int_distribution<int> count(3, 7);
    for (;;) {
        std::vector<Vector> pts;
        const int k = count(rng);
        for (int i = 0; i < k; ++i) pts.push_back(Vector{{u(rng), u(rng)}});
        try {
            ChanceCase c;
            c.region = Polytope::from_vertices("r", pts);
            c.mean = Vector{{m(rng), m(rng)}};
            const double t = ang(rng);
            Matrix R(2, 2);
            R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            const Vector lam{{std::pow(10.0, e(rng)), std::pow(10.0, e(rng))}};
            c.cov = R * lam.asDiagonal() * R.transpose();
            return c;
        } catch (const std::exception&) {
            // degenerate hull; draw again
        }
    }
}

struct McEstimate {
    double p = 0.0;
    double se = 0.0;
};

/// Frequency of `inside` over n samples of N(mean, cov). The standard error
/// uses p clamped to [0.5/n, 1 - 0.5/n] so an empty tail still has one.
inline McEstimate mc_probability(const Polytope& region, const Vector& mean, const Matrix& cov, bool inside,
                                 std::size_t n, std::mt19937_64& rng) {
    const Eigen::LLT<Matrix> llt(cov);
    const Matrix L = llt.matrixL();
    std::normal_distribution<double> z;
    std::size_t hits = 0;
    Vector w(mean.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = z(rng);
        hits += region.contains(mean + L * w) == inside;
    }
    McEstimate out;
    out.p = static_cast<double>(hits) / static_cast<double>(n);
    const double pc = std::clamp(out.p, 0.5 / static_cast<double>(n), 1.0 - 0.5 / static_cast<double>(n));
    out.se = std::sqrt(pc * (1.0 - pc) / static_cast<double>(n));
    return out;
}

inline std::string scenario_dir() { return SIMBA_SCENARIO_DIR; }

/// 2D single integrator on [0,10]^2, dt = 1, K = 0.5 I, steps of at most 0.5
/// per axis. Regions a = [6,9]x[6,9], b = [1,4]x[6,9], o = [3.5,6.5]x[0,4].
inline nlohmann::json toy_document() {
    using nlohmann::json;
    return json::parse(R"({
      "name": "toy",
      "system": {
        "dt": 1.0,
        "A": [[1, 0], [0, 1]],
        "B": [[1, 0], [0, 1]],
        "C": [[1, 0], [0, 1]],
        "Q": {"diag": [1e-4, 1e-4]},
        "K": [[0.5, 0], [0, 0.5]],
        "input_bounds": {"lo": [-0.5, -0.5], "hi": [0.5, 0.5]},
        "state_bounds": {"lo": [0, 0], "hi": [10, 10]},
        "workspace_dims": [0, 1],
        "measurement": {"default_R": {"diag": [1e-3, 1e-3]}}
      },
      "regions": [
        {"name": "a", "box": {"lo": [6, 6], "hi": [9, 9]}},
        {"name": "b", "box": {"lo": [1, 6], "hi": [4, 9]}},
        {"name": "o", "box": {"lo": [3.5, 0], "hi": [6.5, 4]}}
      ],
      "propositions": [
        {"name": "a", "region": "a", "alpha": 0.05},
        {"name": "b", "region": "b", "alpha": 0.05},
        {"name": "safe", "region": "o", "alpha": 0.05, "polarity": "avoid"}
      ],
      "formula": "G safe & F a",
      "initial_belief": {"mean": [1, 1], "cov": {"diag": [0.01, 0.01]}},
      "simba": {"kind": "sba", "v_max": 0.5},
      "planner": {"time_limit": 20}
    })");
}

inline Scenario toy_scenario(const std::string& formula = "G safe & F a") {
    nlohmann::json doc = toy_document();
    doc["formula"] = formula;
    return parse_scenario(doc);
}

}  // namespace simba::testing
