#include "simba/guide.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "simba/error.hpp"

namespace simba {

std::string to_string(GuideKind kind) {
    switch (kind) {
        case GuideKind::None: return "none";
        case GuideKind::Geometric: return "geo";
        case GuideKind::Sba: return "sba";
    }
    return "none";
}

GuideKind parse_guide_kind(const std::string& text) {
    if (text == "none") return GuideKind::None;
    if (text == "geo" || text == "geometric") return GuideKind::Geometric;
    if (text == "sba") return GuideKind::Sba;
    throw InvalidInput("unknown guide kind '" + text + "' (expected none, geo or sba)");
}

Vector SimplifiedModel::project(const Vector& state) const {
    Vector out(static_cast<Eigen::Index>(projection.size()));
    for (std::size_t i = 0; i < projection.size(); ++i) out(static_cast<Eigen::Index>(i)) = state(projection[i]);
    return out;
}

Vector SimplifiedModel::lift(const Vector& projected) const {
    Vector out = lift_defaults;
    for (std::size_t i = 0; i < projection.size(); ++i) out(projection[i]) = projected(static_cast<Eigen::Index>(i));
    return out;
}

void SimplifiedModel::validate(Eigen::Index state_dim, const std::vector<int>& workspace_dims) const {
    if (projection.empty()) throw InvalidInput("simba projection is empty");
    for (int i : projection)
        if (i < 0 || i >= state_dim) throw InvalidInput("simba projection index out of range");
    for (int w : workspace_dims)
        if (std::find(projection.begin(), projection.end(), w) == projection.end())
            throw InvalidInput("simba projection must contain every workspace dimension");
    if (!(v_max > 0.0)) throw InvalidInput("simba v_max must be positive");
    if (lift_defaults.size() != state_dim) throw InvalidInput("simba lift_defaults must have the state dimension");
}

Vector sba_step(const Vector& x, const Vector& direction, double step_length) {
    if (direction.size() != x.size()) throw InvalidInput("direction dimension mismatch");
    const double norm = direction.norm();
    if (norm == 0.0) throw InvalidInput("zero direction");
    if (std::abs(norm - 1.0) > 1e-9) throw InvalidInput("direction must be a unit vector");
    return x + step_length * direction;
}

SimplifiedMotion::SimplifiedMotion(const LinearGaussianSystem& sys, const Labeler& labeler,
                                   const SimplifiedModel& model)
    : sys_(&sys), labeler_(&labeler), model_(&model) {}

std::optional<Vector> SimplifiedMotion::control_toward(const Belief& from, const Vector& target) const {
    const Vector delta = target - from.mean;
    const double norm = delta.norm();
    if (!(norm > 0.0)) return std::nullopt;
    return Vector(delta / norm);
}

std::optional<Belief> SimplifiedMotion::apply(const Belief& from, const Vector& direction) const {
    Belief next;
    next.mean = sba_step(from.mean, direction, step_length());
    const Vector lifted = model_->lift(next.mean);
    if (!sys_->state_bounds.contains(lifted)) return std::nullopt;
    next.est_cov = from.est_cov;
    next.mean_cov = from.mean_cov;
    if (model_->kind == GuideKind::Sba)
        propagate_covariance(*sys_, next.est_cov, next.mean_cov, effective_measurement_noise(*sys_, lifted));
    return next;
}

LabelSet SimplifiedMotion::label(const Belief& belief) const {
    const Vector lifted = model_->lift(belief.mean);
    if (model_->kind == GuideKind::Sba) return labeler_->label(lifted, belief.total_cov());
    return labeler_->label_point(lifted);
}

Belief SimplifiedMotion::root(const Belief& full) const {
    Belief b;
    b.mean = model_->project(full.mean);
    if (model_->kind == GuideKind::Sba) {
        b.est_cov = full.est_cov;
        b.mean_cov = full.mean_cov;
    } else {
        b.est_cov = Matrix::Zero(full.est_cov.rows(), full.est_cov.cols());
        b.mean_cov = b.est_cov;
    }
    return b;
}

namespace {

// Accepting vertices whose automaton states follow `plan` exactly.
std::optional<std::size_t> find_plan_solution(const BeliefTree& tree, const PrunedDfa& dfa, const TaskPlan& plan) {
    const std::size_t goal = plan.run.back();
    for (std::size_t id : tree.in_state(goal)) {
        if (!check_accepting(tree.vertex(id), dfa)) continue;
        std::vector<std::size_t> states;
        for (std::optional<std::size_t> v = id; v; v = tree.vertex(*v).parent) {
            const std::size_t q = tree.vertex(*v).q;
            if (states.empty() || states.back() != q) states.push_back(q);
        }
        std::reverse(states.begin(), states.end());
        if (states == plan.run) return id;
    }
    return std::nullopt;
}

GuidePath to_guide(const Branch& branch) {
    GuidePath g;
    for (std::size_t k = 0; k < branch.beliefs.size(); ++k) {
        g.points.push_back(branch.beliefs[k].mean);
        g.states.push_back(branch.run[k]);
    }
    return g;
}

}  // namespace

std::optional<GuidePath> plan_guide(GuideLayer& layer, const SimplifiedMotion& model, const PrunedDfa& dfa,
                                    const TaskPlan& plan, const Budget& budget, const Box& state_bounds,
                                    std::mt19937_64& rng, int steps) {
    if (plan.run.empty() || layer.tree.empty()) return std::nullopt;
    if (auto id = find_plan_solution(layer.tree, dfa, plan)) return to_guide(replay_branch(layer.tree, model, dfa, *id));

    const auto start = std::chrono::steady_clock::now();
    const TargetSampler sampler = [&](std::size_t, std::mt19937_64& r) { return uniform_sample(state_bounds, r); };
    const TransitionFilter follow_plan = [&](std::size_t q, std::size_t q_next) {
        return plan.contains(q) && plan.successor(q) == q_next;
    };
    for (std::size_t i = 0; i < budget.iterations; ++i) {
        if (i % kClockCheckInterval == 0 && i > 0) {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            if (elapsed.count() >= budget.seconds) break;
        }
        const std::vector<std::size_t> states = frontier(layer.tree, plan);
        auto id = extend(layer.tree, model, dfa, states, sampler, rng, layer.stats, steps, follow_plan);
        if (id && check_accepting(layer.tree.vertex(*id), dfa))
            return to_guide(replay_branch(layer.tree, model, dfa, *id));
    }
    return std::nullopt;
}

GuidePath segment_for(std::size_t q, const GuidePath& guide) {
    GuidePath out;
    std::size_t k = 0;
    while (k < guide.size() && guide.states[k] != q) ++k;
    if (k == guide.size()) return out;
    std::size_t end = k;
    while (end < guide.size() && guide.states[end] == q) ++end;
    if (end < guide.size()) ++end;
    for (std::size_t i = k; i < end; ++i) {
        out.points.push_back(guide.points[i]);
        out.states.push_back(guide.states[i]);
    }
    return out;
}

Vector uniform_sample(const Box& bounds, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x(bounds.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = bounds.lo(i) + unit(rng) * (bounds.hi(i) - bounds.lo(i));
    return x;
}

Vector biased_sample(const GuidePath& segment, double radius, double pr, const Box& state_bounds,
                     const std::vector<int>& projection, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double coin = unit(rng);
    Vector x = uniform_sample(state_bounds, rng);
    if (segment.empty() || !(coin < pr)) return x;

    std::uniform_int_distribution<std::size_t> pick(0, segment.size() - 1);
    const Vector& center = segment.points[pick(rng)];
    const Eigen::Index k = center.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector dir(k);
    do {
        for (Eigen::Index i = 0; i < k; ++i) dir(i) = normal(rng);
    } while (dir.norm() == 0.0);
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(k));
    const Vector offset = center + r * dir.normalized();
    for (std::size_t i = 0; i < projection.size(); ++i) x(projection[i]) = offset(static_cast<Eigen::Index>(i));
    return state_bounds.clamp(x);
}

}  // namespace simba
