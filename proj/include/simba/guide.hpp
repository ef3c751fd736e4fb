/**
 * @file guide.hpp
 * @brief Simplified kinematic models, guide path search and guide-biased
 *        sampling.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "simba/hybrid_tree.hpp"

namespace simba {

enum class GuideKind { None, Geometric, Sba };

std::string to_string(GuideKind kind);
/// Accepts "none", "geo", "geometric", "sba". Throws InvalidInput.
GuideKind parse_guide_kind(const std::string& text);

/// Fixed-speed kinematics on a projection of the state. v_max is a speed
/// (units per second); one step moves v_max * dt.
struct SimplifiedModel {
    GuideKind kind = GuideKind::Sba;
    std::vector<int> projection;  // state indices kept in the simplified space
    double v_max = 1.0;
    Vector lift_defaults;         // full-state values for the dropped indices

    Vector project(const Vector& state) const;
    Vector lift(const Vector& projected) const;
    /// Throws InvalidInput on bad indices, v_max <= 0, or a projection that
    /// misses a workspace dimension.
    void validate(Eigen::Index state_dim, const std::vector<int>& workspace_dims) const;
};

/// x + step_length * direction; |direction| must be 1 (1e-9).
Vector sba_step(const Vector& x, const Vector& direction, double step_length);

/// Both simplified kinds. SBA carries the full system covariance along the
/// lifted states; Geometric carries none and labels the lifted mean as a point.
class SimplifiedMotion final : public MotionModel {
public:
    SimplifiedMotion(const LinearGaussianSystem& sys, const Labeler& labeler, const SimplifiedModel& model);

    Vector to_model_space(const Vector& full_state) const override { return model_->project(full_state); }
    std::optional<Vector> control_toward(const Belief& from, const Vector& target) const override;
    std::optional<Belief> apply(const Belief& from, const Vector& direction) const override;
    LabelSet label(const Belief& belief) const override;

    /// Root belief for a full-state initial belief.
    Belief root(const Belief& full) const;
    double step_length() const { return model_->v_max * sys_->dt; }

private:
    const LinearGaussianSystem* sys_;
    const Labeler* labeler_;
    const SimplifiedModel* model_;
};

/// Sequence of (projected state, automaton state) pairs.
struct GuidePath {
    std::vector<Vector> points;
    std::vector<std::size_t> states;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
};

struct Budget {
    std::size_t iterations = 0;
    double seconds = 0.0;  // wall-clock cap, checked every kClockCheckInterval extensions
};

inline constexpr std::size_t kClockCheckInterval = 64;

/// Guide tree that persists across epochs.
struct GuideLayer {
    BeliefTree tree;
    SearchStats stats;
};

/// Grows the guide tree along the task plan (automaton moves must follow the
/// plan order) until an accepting vertex appears or the budget runs out.
std::optional<GuidePath> plan_guide(GuideLayer& layer, const SimplifiedMotion& model, const PrunedDfa& dfa,
                                    const TaskPlan& plan, const Budget& budget, const Box& state_bounds,
                                    std::mt19937_64& rng, int steps = kDefaultPropagationSteps);

/// From the first entry with state q through its last consecutive entry,
/// plus the following entry if any. Empty when q does not occur.
GuidePath segment_for(std::size_t q, const GuidePath& guide);

/// With probability pr (and a nonempty segment): a waypoint picked uniformly,
/// then a uniform point of the radius-d ball around it in the projected
/// coordinates, other coordinates uniform over the state bounds. Otherwise
/// uniform over the state bounds. Results are clamped to the state bounds.
Vector biased_sample(const GuidePath& segment, double radius, double pr, const Box& state_bounds,
                     const std::vector<int>& projection, std::mt19937_64& rng);

Vector uniform_sample(const Box& bounds, std::mt19937_64& rng);

}  // namespace simba
