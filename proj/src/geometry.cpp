#include "simba/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "simba/error.hpp"
#include "simba/lp.hpp"

namespace simba {

namespace {

Matrix stack_normals(const std::vector<Halfspace>& faces, Eigen::Index dim, Vector& offsets) {
    Matrix A(static_cast<Eigen::Index>(faces.size()), dim);
    offsets.resize(static_cast<Eigen::Index>(faces.size()));
    for (std::size_t i = 0; i < faces.size(); ++i) {
        A.row(static_cast<Eigen::Index>(i)) = faces[i].normal.transpose();
        offsets(static_cast<Eigen::Index>(i)) = faces[i].offset;
    }
    return A;
}

// max t s.t. a_i'x + t <= b_i over the given faces.
lp::Result chebyshev(const std::vector<Halfspace>& faces, Eigen::Index dim) {
    Vector b;
    Matrix A = stack_normals(faces, dim, b);
    Matrix Ax(A.rows(), dim + 1);
    Ax << A, Vector::Ones(A.rows());
    Vector c = Vector::Zero(dim + 1);
    c(dim) = 1.0;
    return lp::maximize(c, Ax, b);
}

double tail(double mean_proj, double var, double offset) {
    // P(a'x > b)
    if (var <= 0.0) return mean_proj > offset ? 1.0 : 0.0;
    return 0.5 * std::erfc((offset - mean_proj) / std::sqrt(2.0 * var));
}

double reach_bound_unchecked(const Vector& mean, const Matrix& cov, const Polytope& region) {
    double total = 0.0;
    for (const Halfspace& h : region.faces())
        total += tail(h.normal.dot(mean), h.normal.dot(cov * h.normal), h.offset);
    return std::max(0.0, 1.0 - total);
}

double avoid_bound_unchecked(const Vector& mean, const Matrix& cov, const Polytope& region) {
    double best = 0.0;
    for (const Halfspace& h : region.faces())
        best = std::max(best, tail(h.normal.dot(mean), h.normal.dot(cov * h.normal), h.offset));
    return best;
}

}  // namespace

// ---------------------------------------------------------------------------

bool Box::contains(const Vector& x, double tol) const {
    return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
}

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

// ---------------------------------------------------------------------------

Polytope Polytope::from_halfspaces(std::string name, std::vector<Halfspace> faces) {
    if (faces.empty()) throw InvalidInput("region '" + name + "' has no halfspaces");
    const Eigen::Index dim = faces.front().normal.size();
    for (Halfspace& h : faces) {
        if (h.normal.size() != dim) throw InvalidInput("region '" + name + "' mixes dimensions");
        const double norm = h.normal.norm();
        if (!(norm > 1e-12)) throw InvalidInput("region '" + name + "' has a zero normal");
        h.normal /= norm;
        h.offset /= norm;
    }
    Vector b;
    Matrix A = stack_normals(faces, dim, b);
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (double sign : {1.0, -1.0}) {
            Vector c = Vector::Zero(dim);
            c(j) = sign;
            const lp::Result r = lp::maximize(c, A, b);
            if (r.status == lp::Status::Unbounded) throw InvalidInput("region '" + name + "' is unbounded");
            if (r.status == lp::Status::Infeasible) throw InvalidInput("region '" + name + "' is empty");
        }
    }
    Polytope p;
    p.name_ = std::move(name);
    p.faces_ = std::move(faces);
    if (!(p.inradius() > 1e-12)) throw InvalidInput("region '" + p.name_ + "' has an empty interior");
    return p;
}

Polytope Polytope::from_vertices(std::string name, const std::vector<Vector>& vertices) {
    if (vertices.empty()) throw InvalidInput("region '" + name + "' has no vertices");
    const Eigen::Index dim = vertices.front().size();
    const std::size_t d = static_cast<std::size_t>(dim);
    if (vertices.size() < d + 1) throw InvalidInput("region '" + name + "' needs at least dim+1 vertices");
    for (const Vector& v : vertices)
        if (v.size() != dim) throw InvalidInput("region '" + name + "' mixes dimensions");

    std::vector<Halfspace> faces;
    auto add_face = [&](Vector normal, double offset) {
        for (const Halfspace& h : faces)
            if ((h.normal - normal).norm() < 1e-9 && std::abs(h.offset - offset) < 1e-9) return;
        faces.push_back({std::move(normal), offset});
    };
    auto try_plane = [&](const std::vector<std::size_t>& idx) {
        Vector normal;
        if (d == 1) {
            normal = Vector::Ones(1);
        } else {
            Matrix span(dim - 1, dim);
            for (std::size_t k = 1; k < idx.size(); ++k)
                span.row(static_cast<Eigen::Index>(k - 1)) = (vertices[idx[k]] - vertices[idx[0]]).transpose();
            Eigen::FullPivLU<Matrix> lu(span);
            if (lu.rank() != dim - 1) return;
            normal = lu.kernel().col(0);
            normal.normalize();
        }
        const double offset = normal.dot(vertices[idx[0]]);
        bool all_below = true, all_above = true;
        for (const Vector& v : vertices) {
            const double s = normal.dot(v) - offset;
            if (s > 1e-9) all_below = false;
            if (s < -1e-9) all_above = false;
        }
        if (all_below) add_face(normal, offset);
        if (all_above) add_face(-normal, -offset);
    };
    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> choose = [&](std::size_t start) {
        if (idx.size() == d) {
            try_plane(idx);
            return;
        }
        for (std::size_t i = start; i < vertices.size(); ++i) {
            idx.push_back(i);
            choose(i + 1);
            idx.pop_back();
        }
    };
    choose(0);
    return from_halfspaces(std::move(name), std::move(faces));
}

Polytope Polytope::box(std::string name, const Vector& lo, const Vector& hi) {
    if (lo.size() != hi.size()) throw InvalidInput("box '" + name + "' bounds differ in dimension");
    std::vector<Halfspace> faces;
    for (Eigen::Index j = 0; j < lo.size(); ++j) {
        Vector e = Vector::Zero(lo.size());
        e(j) = 1.0;
        faces.push_back({e, hi(j)});
        faces.push_back({-e, -lo(j)});
    }
    return from_halfspaces(std::move(name), std::move(faces));
}

bool Polytope::contains(const Vector& x, double tol) const {
    return std::all_of(faces_.begin(), faces_.end(),
                       [&](const Halfspace& h) { return h.normal.dot(x) <= h.offset + tol; });
}

double Polytope::inradius() const {
    const lp::Result r = chebyshev(faces_, dim());
    return r.status == lp::Status::Optimal ? r.value : 0.0;
}

bool Polytope::is_subset_of(const Polytope& other, double tol) const {
    Vector b;
    Matrix A = stack_normals(faces_, dim(), b);
    for (const Halfspace& h : other.faces()) {
        const lp::Result r = lp::maximize(h.normal, A, b);
        if (r.status != lp::Status::Optimal || r.value > h.offset + tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void require_psd(const Matrix& cov) {
    if (cov.rows() != cov.cols()) throw InvalidInput("covariance is not square");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw InvalidInput("covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) throw InvalidInput("covariance is not positive semidefinite");
}

double halfspace_prob(const Vector& mean, const Matrix& cov, const Halfspace& h) {
    require_psd(cov);
    return 1.0 - tail(h.normal.dot(mean), h.normal.dot(cov * h.normal), h.offset);
}

double polytope_prob_lower_bound(const Vector& mean, const Matrix& cov, const Polytope& region) {
    require_psd(cov);
    return reach_bound_unchecked(mean, cov, region);
}

double polytope_avoid_lower_bound(const Vector& mean, const Matrix& cov, const Polytope& region) {
    require_psd(cov);
    return avoid_bound_unchecked(mean, cov, region);
}

// ---------------------------------------------------------------------------

double overlap_margin(const Polytope& a, const Polytope& b) {
    if (a.dim() != b.dim()) throw InvalidInput("regions differ in dimension");
    std::vector<Halfspace> faces = a.faces();
    faces.insert(faces.end(), b.faces().begin(), b.faces().end());
    const lp::Result r = chebyshev(faces, a.dim());
    if (r.status != lp::Status::Optimal) throw NumericalError("overlap LP failed");
    return r.value;
}

Overlap classify_overlap(const Polytope& a, const Polytope& b) {
    const double t = overlap_margin(a, b);
    if (t > kOverlapMargin) return Overlap::Intersecting;
    if (t >= -kAdjacencyTolerance) return Overlap::Adjacent;
    return Overlap::Disjoint;
}

std::optional<std::size_t> AdjacencyGraph::index(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == name) return i;
    return std::nullopt;
}

std::optional<EdgeKind> AdjacencyGraph::edge(const std::string& a, const std::string& b) const {
    auto ia = index(a), ib = index(b);
    if (!ia || !ib) return std::nullopt;
    auto key = std::minmax(*ia, *ib);
    auto it = edges.find({key.first, key.second});
    if (it == edges.end()) return std::nullopt;
    return it->second;
}

AdjacencyGraph build_adjacency_graph(std::span<const Polytope> regions, const Box& workspace) {
    AdjacencyGraph g;
    for (const Polytope& p : regions) {
        if (p.dim() != workspace.dim())
            throw InvalidInput("region '" + p.name() + "' does not match the workspace dimension");
        g.nodes.push_back(p.name());
    }
    const std::size_t remainder = g.nodes.size();
    g.nodes.push_back(AdjacencyGraph::kRemainder);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            switch (classify_overlap(regions[i], regions[j])) {
                case Overlap::Intersecting: g.edges[{i, j}] = EdgeKind::Intersecting; break;
                case Overlap::Adjacent: g.edges[{i, j}] = EdgeKind::Adjacent; break;
                case Overlap::Disjoint: break;
            }
        }
        g.edges[{i, remainder}] = EdgeKind::Adjacent;
    }
    return g;
}

// ---------------------------------------------------------------------------

std::vector<std::string> LabelSet::names(const PropTable& props) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < props.size(); ++i)
        if (contains(i)) out.push_back(props.at(i).name);
    return out;
}

Labeler::Labeler(PropTable props, std::vector<Polytope> regions, std::vector<int> workspace_dims)
    : props_(std::move(props)), regions_(std::move(regions)), workspace_dims_(std::move(workspace_dims)) {
    if (props_.size() > 64) throw ResourceError("at most 64 propositions are supported");
    for (const AtomicProp& p : props_.props()) {
        auto it = std::find_if(regions_.begin(), regions_.end(),
                               [&](const Polytope& r) { return r.name() == p.region; });
        if (it == regions_.end())
            throw InvalidInput("proposition '" + p.name + "' references unknown region '" + p.region + "'");
        if (it->dim() != static_cast<Eigen::Index>(workspace_dims_.size()))
            throw InvalidInput("region '" + p.region + "' does not match the workspace dimension");
        region_index_.push_back(static_cast<std::size_t>(it - regions_.begin()));
    }
}

const Polytope* Labeler::find_region(const std::string& name) const {
    for (const Polytope& r : regions_)
        if (r.name() == name) return &r;
    return nullptr;
}

Vector Labeler::project(const Vector& state) const {
    Vector out(static_cast<Eigen::Index>(workspace_dims_.size()));
    for (std::size_t i = 0; i < workspace_dims_.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = state(workspace_dims_[i]);
    return out;
}

Matrix Labeler::project(const Matrix& cov) const {
    const auto n = static_cast<Eigen::Index>(workspace_dims_.size());
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = cov(workspace_dims_[static_cast<std::size_t>(i)], workspace_dims_[static_cast<std::size_t>(j)]);
    return out;
}

LabelSet Labeler::label(const Vector& state_mean, const Matrix& state_cov) const {
    return label_workspace(project(state_mean), project(state_cov));
}

LabelSet Labeler::label_workspace(const Vector& mean, const Matrix& cov) const {
    require_psd(cov);
    LabelSet out;
    for (std::size_t i = 0; i < props_.size(); ++i) {
        const AtomicProp& p = props_.at(i);
        const Polytope& region = regions_[region_index_[i]];
        const bool holds = p.polarity == Polarity::Reach ? reach_bound_unchecked(mean, cov, region) > 1.0 - p.alpha
                                                         : avoid_bound_unchecked(mean, cov, region) >= 1.0 - p.alpha;
        if (holds) out.insert(i);
    }
    return out;
}

LabelSet Labeler::label_point(const Vector& state) const {
    const auto n = static_cast<Eigen::Index>(workspace_dims_.size());
    return label_workspace(project(state), Matrix::Zero(n, n));
}

}  // namespace simba
