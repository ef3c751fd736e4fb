/**
 * @file geometry.hpp
 * @brief Convex polytopic regions, Gaussian chance-constraint bounds,
 *        region adjacency and belief labeling.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "simba/ltlf.hpp"

namespace simba {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// normal' x <= offset, with |normal| = 1.
struct Halfspace {
    Vector normal;
    double offset = 0.0;
};

/// Axis-aligned box; used for state, input and workspace bounds.
struct Box {
    Vector lo;
    Vector hi;

    Eigen::Index dim() const { return lo.size(); }
    bool contains(const Vector& x, double tol = 0.0) const;
    Vector clamp(const Vector& x) const;
    double diameter() const { return (hi - lo).norm(); }
};

class Polytope {
public:
    Polytope() = default;

    /// Normals are rescaled to unit length. Throws InvalidInput when the
    /// region is empty, has no interior, or is unbounded.
    static Polytope from_halfspaces(std::string name, std::vector<Halfspace> faces);
    /// Convex hull of the given points (facets by enumeration; small inputs).
    static Polytope from_vertices(std::string name, const std::vector<Vector>& vertices);
    static Polytope box(std::string name, const Vector& lo, const Vector& hi);

    const std::string& name() const noexcept { return name_; }
    Eigen::Index dim() const { return faces_.empty() ? 0 : faces_.front().normal.size(); }
    const std::vector<Halfspace>& faces() const noexcept { return faces_; }

    bool contains(const Vector& x, double tol = 0.0) const;
    /// Radius of the largest inscribed ball.
    double inradius() const;
    bool is_subset_of(const Polytope& other, double tol = 1e-9) const;

private:
    std::string name_;
    std::vector<Halfspace> faces_;
};

/// Standard normal CDF.
double normal_cdf(double z);

/// Throws InvalidInput unless `cov` is symmetric PSD (tolerance 1e-9).
void require_psd(const Matrix& cov);

/// P(a'x <= b) for x ~ N(mean, cov). A degenerate direction (a'cov a = 0)
/// gives the indicator of a'mean <= b.
double halfspace_prob(const Vector& mean, const Matrix& cov, const Halfspace& h);

/// Boole lower bound on P(x in region): max(0, 1 - sum_j P(a_j'x > b_j)).
double polytope_prob_lower_bound(const Vector& mean, const Matrix& cov, const Polytope& region);

/// Lower bound on P(x not in region): max_j P(a_j'x > b_j).
double polytope_avoid_lower_bound(const Vector& mean, const Matrix& cov, const Polytope& region);

enum class Overlap { Disjoint, Adjacent, Intersecting };

inline constexpr double kAdjacencyTolerance = 1e-6;
inline constexpr double kOverlapMargin = 1e-9;

/// Largest t with a_i'x + t <= b_i for all faces of both regions; positive
/// iff the interiors overlap, about minus half the gap when separated.
double overlap_margin(const Polytope& a, const Polytope& b);
Overlap classify_overlap(const Polytope& a, const Polytope& b);

enum class EdgeKind { Adjacent, Intersecting };

struct AdjacencyGraph {
    static constexpr const char* kRemainder = "__remainder__";

    std::vector<std::string> nodes;  // regions, then the remainder node
    std::map<std::pair<std::size_t, std::size_t>, EdgeKind> edges;  // key (i < j)

    std::optional<std::size_t> index(const std::string& name) const;
    std::optional<EdgeKind> edge(const std::string& a, const std::string& b) const;
    bool intersecting(const std::string& a, const std::string& b) const {
        return edge(a, b) == EdgeKind::Intersecting;
    }
};

/// Every region is linked to the remainder node.
AdjacencyGraph build_adjacency_graph(std::span<const Polytope> regions, const Box& workspace);

/// Subset of a proposition table, as a bitmask over table indices.
struct LabelSet {
    std::uint64_t mask = 0;

    bool contains(std::size_t i) const noexcept { return (mask >> i) & 1u; }
    void insert(std::size_t i) noexcept { mask |= std::uint64_t{1} << i; }
    std::vector<std::string> names(const PropTable& props) const;
    friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

/// Maps workspace Gaussians to the set of propositions that hold for them.
/// Reach props use the Boole bound, Avoid props the best separating face, so
/// the label can under-report truth but never over-reports it.
class Labeler {
public:
    Labeler() = default;
    Labeler(PropTable props, std::vector<Polytope> regions, std::vector<int> workspace_dims);

    const PropTable& props() const noexcept { return props_; }
    const std::vector<Polytope>& regions() const noexcept { return regions_; }
    const std::vector<int>& workspace_dims() const noexcept { return workspace_dims_; }
    const Polytope& region_of(std::size_t prop) const { return regions_.at(region_index_.at(prop)); }
    const Polytope* find_region(const std::string& name) const;

    Vector project(const Vector& state) const;
    Matrix project(const Matrix& cov) const;

    /// Label for a full-state Gaussian (marginalized to the workspace).
    LabelSet label(const Vector& state_mean, const Matrix& state_cov) const;
    /// Label for a Gaussian already expressed in workspace coordinates.
    LabelSet label_workspace(const Vector& mean, const Matrix& cov) const;
    /// Label of a point (zero covariance).
    LabelSet label_point(const Vector& state) const;

private:
    PropTable props_;
    std::vector<Polytope> regions_;
    std::vector<std::size_t> region_index_;
    std::vector<int> workspace_dims_;
};

}  // namespace simba
