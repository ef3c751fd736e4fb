#include "simba/belief.hpp"

#include <cmath>

#include "simba/error.hpp"

namespace simba {

namespace {

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

// Kalman gain L = Σ⁻ C' (C Σ⁻ C' + R)^-1. A singular innovation matrix is
// tolerated only when the prior carries no uncertainty along C.
Matrix kalman_gain(const Matrix& prior, const Matrix& C, const Matrix& R) {
    const Matrix S = C * prior * C.transpose() + R;
    const Matrix PCt = prior * C.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() <= 1e-14 * scale) {
        if (PCt.cwiseAbs().maxCoeff() <= 1e-14) return Matrix::Zero(prior.rows(), C.rows());
        throw NumericalError("innovation covariance is singular");
    }
    return S.ldlt().solve(PCt.transpose()).transpose();
}

}  // namespace

void LinearGaussianSystem::validate() const {
    const Eigen::Index n = A.rows(), m = B.cols(), p = C.rows();
    if (A.cols() != n) throw InvalidInput("A must be square");
    if (B.rows() != n) throw InvalidInput("B must have as many rows as A");
    if (C.cols() != n) throw InvalidInput("C must have as many columns as A");
    if (D.rows() != p || D.cols() != m) throw InvalidInput("D must be p x m");
    if (Q.rows() != n || Q.cols() != n) throw InvalidInput("Q must be n x n");
    if (K.rows() != m || K.cols() != n) throw InvalidInput("K must be m x n");
    require_psd(Q);
    auto check_R = [&](const std::optional<Matrix>& R, const std::string& where) {
        if (!R) return;
        if (R->rows() != p || R->cols() != p) throw InvalidInput(where + ": R must be p x p");
        require_psd(*R);
    };
    check_R(default_R, "default measurement noise");
    for (const MeasurementZone& z : zones) {
        check_R(z.R, "zone '" + z.name + "'");
        if (z.region.dim() != static_cast<Eigen::Index>(workspace_dims.size()))
            throw InvalidInput("zone '" + z.name + "' does not match the workspace dimension");
    }
    if (input_bounds.dim() != m || state_bounds.dim() != n) throw InvalidInput("bound boxes have wrong dimension");
    if ((input_bounds.lo.array() > input_bounds.hi.array()).any() ||
        (state_bounds.lo.array() > state_bounds.hi.array()).any())
        throw InvalidInput("bound boxes have lo > hi");
    for (int d : workspace_dims)
        if (d < 0 || d >= n) throw InvalidInput("workspace dimension index out of range");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    const double rho = spectral_radius(closed_loop());
    if (!(rho < 1.0))
        throw InvalidInput("feedback gain is not stabilizing: spectral radius of A - BK is " + std::to_string(rho));
}

Vector LinearGaussianSystem::workspace_point(const Vector& state) const {
    Vector out(static_cast<Eigen::Index>(workspace_dims.size()));
    for (std::size_t i = 0; i < workspace_dims.size(); ++i) out(static_cast<Eigen::Index>(i)) = state(workspace_dims[i]);
    return out;
}

std::optional<Matrix> effective_measurement_noise(const LinearGaussianSystem& sys, const Vector& state) {
    const Vector w = sys.workspace_point(state);
    for (const MeasurementZone& z : sys.zones)
        if (z.region.contains(w)) return z.R;
    return sys.default_R;
}

double spectral_radius(const Matrix& M) {
    Eigen::EigenSolver<Matrix> eig(M, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix dlqr(const Matrix& A, const Matrix& B, const Matrix& state_weight, const Matrix& input_weight) {
    Matrix P = state_weight;
    for (int it = 0; it < 100000; ++it) {
        const Matrix G = input_weight + B.transpose() * P * B;
        const Matrix next = state_weight + A.transpose() * P * A -
                            A.transpose() * P * B * G.ldlt().solve(B.transpose() * P * A);
        const double change = (next - P).cwiseAbs().maxCoeff();
        P = 0.5 * (next + next.transpose());
        if (change < 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff())) break;
    }
    return (input_weight + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
}

Belief initial_belief(const Vector& mean, const Matrix& cov) {
    return Belief{mean, cov, Matrix::Zero(cov.rows(), cov.cols())};
}

void propagate_covariance(const LinearGaussianSystem& sys, Matrix& est_cov, Matrix& mean_cov,
                          const std::optional<Matrix>& R) {
    Matrix prior = sys.A * est_cov * sys.A.transpose() + sys.Q;
    symmetrize(prior);
    const Matrix closed = sys.closed_loop();
    mean_cov = closed * mean_cov * closed.transpose();
    if (R) {
        const Matrix L = kalman_gain(prior, sys.C, *R);
        const Matrix LC = L * sys.C;
        const Matrix I_LC = Matrix::Identity(prior.rows(), prior.cols()) - LC;
        est_cov = I_LC * prior * I_LC.transpose() + L * (*R) * L.transpose();
        mean_cov += LC * prior;
    } else {
        est_cov = prior;
    }
    symmetrize(est_cov);
    symmetrize(mean_cov);
}

std::optional<Belief> try_propagate_belief(const LinearGaussianSystem& sys, const Belief& belief,
                                           const Vector& control) {
    if (!sys.input_bounds.contains(control, 1e-9)) return std::nullopt;
    Belief next;
    next.mean = sys.A * belief.mean + sys.B * control;
    if (!sys.state_bounds.contains(next.mean)) return std::nullopt;
    next.est_cov = belief.est_cov;
    next.mean_cov = belief.mean_cov;
    propagate_covariance(sys, next.est_cov, next.mean_cov, effective_measurement_noise(sys, next.mean));
    return next;
}

Belief propagate_belief(const LinearGaussianSystem& sys, const Belief& belief, const Vector& control) {
    if (!sys.input_bounds.contains(control, 1e-9)) throw BoundaryViolation("control outside input bounds");
    auto next = try_propagate_belief(sys, belief, control);
    if (!next) throw BoundaryViolation("nominal state leaves the state bounds");
    return *next;
}

double NominalPlan::residual(const LinearGaussianSystem& sys) const {
    if (states.size() != controls.size() + 1) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t k = 0; k < controls.size(); ++k)
        worst = std::max(worst, (states[k + 1] - sys.A * states[k] - sys.B * controls[k]).cwiseAbs().maxCoeff());
    return worst;
}

Vector sample_gaussian(const Vector& mean, const Matrix& cov, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return mean + eig.eigenvectors() * root.asDiagonal() * z;
}

ClosedLoopTrace simulate_closed_loop(const LinearGaussianSystem& sys, const NominalPlan& plan,
                                     const Vector& true_initial, const Vector& estimate_initial,
                                     const Matrix& estimate_cov, std::mt19937_64& rng) {
    if (plan.states.empty()) throw InvalidInput("plan is empty");
    const Eigen::Index n = sys.state_dim();
    const Vector zero_n = Vector::Zero(n);
    const Vector zero_p = Vector::Zero(sys.measurement_dim());

    ClosedLoopTrace trace;
    Vector x = true_initial;
    Vector xh = estimate_initial;
    Matrix P = estimate_cov;
    trace.true_states.push_back(x);
    trace.estimates.push_back(xh);
    trace.measurements.emplace_back();
    trace.state_violation = !sys.state_bounds.contains(x);

    for (std::size_t k = 0; k < plan.controls.size(); ++k) {
        Vector u = plan.controls[k] - sys.K * (xh - plan.states[k]);
        const Vector clamped = sys.input_bounds.clamp(u);
        if ((clamped - u).cwiseAbs().maxCoeff() > 0.0) trace.input_saturated = true;
        u = clamped;

        x = sys.A * x + sys.B * u + sample_gaussian(zero_n, sys.Q, rng);
        xh = sys.A * xh + sys.B * u;
        P = sys.A * P * sys.A.transpose() + sys.Q;
        symmetrize(P);

        std::optional<Vector> z;
        if (auto R = effective_measurement_noise(sys, x)) {
            z = sys.C * x + sys.D * u + sample_gaussian(zero_p, *R, rng);
            const Matrix L = kalman_gain(P, sys.C, *R);
            xh += L * (*z - sys.C * xh - sys.D * u);
            const Matrix I_LC = Matrix::Identity(n, n) - L * sys.C;
            P = I_LC * P * I_LC.transpose() + L * (*R) * L.transpose();
            symmetrize(P);
        }
        if (!sys.state_bounds.contains(x)) trace.state_violation = true;
        trace.true_states.push_back(x);
        trace.estimates.push_back(xh);
        trace.measurements.push_back(std::move(z));
        trace.inputs.push_back(u);
    }
    return trace;
}

}  // namespace simba
