/**
 * @file hybrid_tree.hpp
 * @brief Hybrid tree over (Gaussian belief, automaton state) vertices.
 *
 * The same tree drives both search layers; the dynamics and labeling come
 * from a MotionModel (the full system here, the simplified models in
 * guide.hpp).
 */
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "simba/belief.hpp"
#include "simba/task_planner.hpp"

namespace simba {

class MotionModel {
public:
    virtual ~MotionModel() = default;

    /// Maps a full-state sample into the space vertex means live in.
    virtual Vector to_model_space(const Vector& full_state) const = 0;
    /// Control that moves `from` toward `target` (model space); nullopt if none.
    virtual std::optional<Vector> control_toward(const Belief& from, const Vector& target) const = 0;
    /// One step under `control`; nullopt when a bound is violated.
    virtual std::optional<Belief> apply(const Belief& from, const Vector& control) const = 0;
    virtual LabelSet label(const Belief& belief) const = 0;
};

/// The full linear Gaussian system. Steering solves B u = target - A x̌ in the
/// least-squares sense and clamps u to the input box.
class FullModel final : public MotionModel {
public:
    FullModel(const LinearGaussianSystem& sys, const Labeler& labeler);

    Vector to_model_space(const Vector& full_state) const override { return full_state; }
    std::optional<Vector> control_toward(const Belief& from, const Vector& target) const override;
    std::optional<Belief> apply(const Belief& from, const Vector& control) const override;
    LabelSet label(const Belief& belief) const override;

private:
    const LinearGaussianSystem* sys_;
    const Labeler* labeler_;
    Matrix pinv_B_;
};

struct TreeVertex {
    Belief belief;
    std::size_t q = 0;
    std::optional<std::size_t> parent;
    std::vector<Vector> incoming_controls;
    std::size_t depth = 0;  // steps from the root
};

class BeliefTree {
public:
    BeliefTree() = default;

    /// Root with q = delta(q0, L(b0)) on the pruned automaton.
    static BeliefTree rooted(const MotionModel& model, const PrunedDfa& dfa, Belief root);

    std::size_t size() const noexcept { return vertices_.size(); }
    bool empty() const noexcept { return vertices_.empty(); }
    const TreeVertex& vertex(std::size_t id) const { return vertices_.at(id); }
    const TreeVertex& root() const { return vertices_.at(0); }
    std::size_t count(std::size_t q) const { return q < by_state_.size() ? by_state_[q].size() : 0; }
    const std::vector<std::size_t>& in_state(std::size_t q) const;

    std::size_t add(TreeVertex v);
    /// Vertex of class q whose mean is closest to `point` (Euclidean).
    std::optional<std::size_t> nearest(std::size_t q, const Vector& point) const;

private:
    std::vector<TreeVertex> vertices_;
    std::vector<std::vector<std::size_t>> by_state_;
    std::vector<std::vector<double>> means_by_state_;  // packed means, parallel to by_state_
};

struct SearchStats {
    std::size_t extensions = 0;
    std::size_t added = 0;
    std::size_t rejected = 0;
    std::size_t pruned_label_hits = 0;  // labels that were a pruned letter; stays 0 when pruning is sound
};

/// Full-state target for an extension out of automaton state q.
using TargetSampler = std::function<Vector(std::size_t q, std::mt19937_64& rng)>;
/// Extra admissibility test on automaton moves q -> q' (q' != q).
using TransitionFilter = std::function<bool(std::size_t q, std::size_t q_next)>;

inline constexpr int kDefaultPropagationSteps = 5;

/// States of the task plan that hold at least one vertex.
std::vector<std::size_t> frontier(const BeliefTree& tree, const TaskPlan& plan);

/// One extension: pick q uniformly from `frontier_states`, sample a target,
/// take the nearest vertex of class q and propagate up to `steps` steps,
/// advancing the automaton on every label. Stops early when the automaton
/// state changes. Rejected if any step leaves the bounds, reads a pruned
/// letter, enters a state with no accepting continuation or fails `filter`.
std::optional<std::size_t> extend(BeliefTree& tree, const MotionModel& model, const PrunedDfa& dfa,
                                  std::span<const std::size_t> frontier_states, const TargetSampler& sampler,
                                  std::mt19937_64& rng, SearchStats& stats, int steps = kDefaultPropagationSteps,
                                  const TransitionFilter& filter = {});

bool check_accepting(const TreeVertex& vertex, const PrunedDfa& dfa);

/// Root-to-vertex replay: every step re-propagated, relabeled and stepped
/// through the pruned automaton. Throws std::logic_error if the replay does
/// not reproduce the stored vertices bit-exactly.
struct Branch {
    std::vector<std::size_t> vertices;  // root .. vertex
    std::vector<Vector> controls;
    std::vector<Belief> beliefs;        // controls.size() + 1
    std::vector<LabelSet> word;         // one label per belief
    std::vector<std::size_t> run;       // automaton state after each label
};
Branch replay_branch(const BeliefTree& tree, const MotionModel& model, const PrunedDfa& dfa, std::size_t vertex);

struct ExtractedPlan {
    NominalPlan plan;
    std::vector<Belief> beliefs;
    std::vector<LabelSet> word;
    std::vector<std::size_t> run;
};

/// Plan for an accepting vertex; the word is re-checked against the
/// unpruned automaton (std::logic_error if rejected).
ExtractedPlan extract_plan(const BeliefTree& tree, const FullModel& model, const PrunedDfa& dfa,
                           std::size_t vertex);

}  // namespace simba
