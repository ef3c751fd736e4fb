#include "simba/hybrid_tree.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "simba/error.hpp"

namespace simba {

FullModel::FullModel(const LinearGaussianSystem& sys, const Labeler& labeler)
    : sys_(&sys), labeler_(&labeler), pinv_B_(sys.B.completeOrthogonalDecomposition().pseudoInverse()) {}

std::optional<Vector> FullModel::control_toward(const Belief& from, const Vector& target) const {
    return sys_->input_bounds.clamp(pinv_B_ * (target - sys_->A * from.mean));
}

std::optional<Belief> FullModel::apply(const Belief& from, const Vector& control) const {
    return try_propagate_belief(*sys_, from, control);
}

LabelSet FullModel::label(const Belief& belief) const {
    return labeler_->label(belief.mean, belief.total_cov());
}

BeliefTree BeliefTree::rooted(const MotionModel& model, const PrunedDfa& dfa, Belief root) {
    BeliefTree tree;
    TreeVertex v;
    v.q = dfa.step(dfa.base.initial(), dfa.symbol_of(model.label(root)));
    v.belief = std::move(root);
    tree.add(std::move(v));
    return tree;
}

const std::vector<std::size_t>& BeliefTree::in_state(std::size_t q) const {
    static const std::vector<std::size_t> none;
    return q < by_state_.size() ? by_state_[q] : none;
}

std::size_t BeliefTree::add(TreeVertex v) {
    const std::size_t id = vertices_.size();
    if (v.q >= by_state_.size()) {
        by_state_.resize(v.q + 1);
        means_by_state_.resize(v.q + 1);
    }
    by_state_[v.q].push_back(id);
    const Vector& m = v.belief.mean;
    means_by_state_[v.q].insert(means_by_state_[v.q].end(), m.data(), m.data() + m.size());
    vertices_.push_back(std::move(v));
    return id;
}

std::optional<std::size_t> BeliefTree::nearest(std::size_t q, const Vector& point) const {
    if (q >= by_state_.size() || by_state_[q].empty()) return std::nullopt;
    const std::vector<double>& packed = means_by_state_[q];
    const std::size_t dim = static_cast<std::size_t>(point.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < by_state_[q].size(); ++i) {
        const double* m = packed.data() + i * dim;
        double d = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double e = m[j] - point(static_cast<Eigen::Index>(j));
            d += e * e;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return by_state_[q][best];
}

std::vector<std::size_t> frontier(const BeliefTree& tree, const TaskPlan& plan) {
    std::vector<std::size_t> out;
    for (std::size_t q : plan.run)
        if (tree.count(q) > 0 && std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
    return out;
}

std::optional<std::size_t> extend(BeliefTree& tree, const MotionModel& model, const PrunedDfa& dfa,
                                  std::span<const std::size_t> frontier_states, const TargetSampler& sampler,
                                  std::mt19937_64& rng, SearchStats& stats, int steps,
                                  const TransitionFilter& filter) {
    if (tree.empty() || frontier_states.empty()) return std::nullopt;
    ++stats.extensions;
    std::uniform_int_distribution<std::size_t> pick(0, frontier_states.size() - 1);
    const std::size_t q = frontier_states[pick(rng)];
    const Vector target = model.to_model_space(sampler(q, rng));
    const auto from_id = tree.nearest(q, target);
    if (!from_id) {
        ++stats.rejected;
        return std::nullopt;
    }

    const TreeVertex& from = tree.vertex(*from_id);
    TreeVertex child;
    child.parent = *from_id;
    child.depth = from.depth;
    child.q = from.q;
    Belief belief = from.belief;
    for (int k = 0; k < steps; ++k) {
        auto control = model.control_toward(belief, target);
        if (!control) break;
        auto next = model.apply(belief, *control);
        if (!next) {
            ++stats.rejected;
            return std::nullopt;
        }
        const Symbol s = dfa.symbol_of(model.label(*next));
        if (dfa.is_pruned(s)) {
            ++stats.pruned_label_hits;
            ++stats.rejected;
            return std::nullopt;
        }
        const std::size_t q_next = dfa.step(child.q, s);
        if (!dfa.usable(q_next) || (q_next != child.q && filter && !filter(child.q, q_next))) {
            ++stats.rejected;
            return std::nullopt;
        }
        belief = std::move(*next);
        child.incoming_controls.push_back(std::move(*control));
        ++child.depth;
        const bool changed = q_next != child.q;
        child.q = q_next;
        if (changed || dfa.is_accepting(q_next)) break;
    }
    if (child.incoming_controls.empty()) {
        ++stats.rejected;
        return std::nullopt;
    }
    child.belief = std::move(belief);
    ++stats.added;
    return tree.add(std::move(child));
}

bool check_accepting(const TreeVertex& vertex, const PrunedDfa& dfa) { return dfa.is_accepting(vertex.q); }

Branch replay_branch(const BeliefTree& tree, const MotionModel& model, const PrunedDfa& dfa, std::size_t vertex) {
    Branch b;
    for (std::optional<std::size_t> v = vertex; v; v = tree.vertex(*v).parent) b.vertices.push_back(*v);
    std::reverse(b.vertices.begin(), b.vertices.end());

    const TreeVertex& root = tree.vertex(b.vertices.front());
    Belief belief = root.belief;
    LabelSet label = model.label(belief);
    std::size_t q = dfa.step(dfa.base.initial(), dfa.symbol_of(label));
    if (q != root.q) throw std::logic_error("replay: root automaton state mismatch");
    b.beliefs.push_back(belief);
    b.word.push_back(label);
    b.run.push_back(q);

    for (std::size_t i = 1; i < b.vertices.size(); ++i) {
        const TreeVertex& v = tree.vertex(b.vertices[i]);
        for (const Vector& u : v.incoming_controls) {
            auto next = model.apply(belief, u);
            if (!next) throw std::logic_error("replay: stored control violates a bound");
            belief = std::move(*next);
            label = model.label(belief);
            q = dfa.step(q, dfa.symbol_of(label));
            b.controls.push_back(u);
            b.beliefs.push_back(belief);
            b.word.push_back(label);
            b.run.push_back(q);
        }
        if (!(belief == v.belief) || q != v.q) throw std::logic_error("replay: stored vertex not reproduced");
    }
    return b;
}

ExtractedPlan extract_plan(const BeliefTree& tree, const FullModel& model, const PrunedDfa& dfa,
                           std::size_t vertex) {
    if (!check_accepting(tree.vertex(vertex), dfa)) throw std::logic_error("extract_plan: vertex is not accepting");
    Branch b = replay_branch(tree, model, dfa, vertex);

    std::vector<Symbol> symbols;
    for (const LabelSet& l : b.word) symbols.push_back(dfa.symbol_of(l));
    if (!dfa.base.accepts(symbols)) throw std::logic_error("extract_plan: word rejected by the unpruned automaton");

    ExtractedPlan out;
    out.plan.controls = std::move(b.controls);
    for (const Belief& belief : b.beliefs) out.plan.states.push_back(belief.mean);
    out.beliefs = std::move(b.beliefs);
    out.word = std::move(b.word);
    out.run = std::move(b.run);
    return out;
}

}  // namespace simba
