/**
 * @file belief.hpp
 * @brief Linear Gaussian system, feedback controller, nominal-belief
 *        covariance recursions and the closed-loop Monte-Carlo simulator.
 *
 * The belief about the true state at step k is N(x̌_k, Σ⁺_k + Λ⁺_k): Σ⁺ is
 * the online estimation error covariance, Λ⁺ the covariance of the online
 * estimate about the nominal trajectory, both computed before execution.
 */
#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "simba/geometry.hpp"

namespace simba {

/// Measurement noise is piecewise constant over ordered zones; the first zone
/// containing the workspace point wins. An empty R means "no measurement".
struct MeasurementZone {
    std::string name;
    Polytope region;
    std::optional<Matrix> R;
};

struct LinearGaussianSystem {
    Matrix A, B, C, D;
    Matrix Q;                       // process noise covariance
    std::vector<MeasurementZone> zones;
    std::optional<Matrix> default_R;  // used outside all zones
    Matrix K;                       // feedback gain, u = ǔ - K (x̂ - x̌)
    Box input_bounds;
    Box state_bounds;
    double dt = 0.1;
    std::vector<int> workspace_dims;

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }
    Eigen::Index measurement_dim() const { return C.rows(); }
    Matrix closed_loop() const { return A - B * K; }

    /// Dimension, PSD and stability checks. Throws InvalidInput.
    void validate() const;
    Vector workspace_point(const Vector& state) const;
};

/// Effective R at `state`; std::nullopt means the Kalman update is skipped
/// (the R -> infinity limit).
std::optional<Matrix> effective_measurement_noise(const LinearGaussianSystem& sys, const Vector& state);

double spectral_radius(const Matrix& M);

/// Discrete-time infinite-horizon LQR gain for x' = Ax + Bu.
Matrix dlqr(const Matrix& A, const Matrix& B, const Matrix& state_weight, const Matrix& input_weight);

struct Belief {
    Vector mean;      // nominal mean x̌
    Matrix est_cov;   // Σ⁺
    Matrix mean_cov;  // Λ⁺

    Matrix total_cov() const { return est_cov + mean_cov; }
    friend bool operator==(const Belief& a, const Belief& b) {
        return a.mean == b.mean && a.est_cov == b.est_cov && a.mean_cov == b.mean_cov;
    }
};

/// Initial belief: Λ⁺ = 0, Σ⁺ = the supplied covariance.
Belief initial_belief(const Vector& mean, const Matrix& cov);

/// One step of the Σ/Λ recursions with measurement noise `R` (nullopt skips
/// the update). Joseph-form update, symmetrized.
void propagate_covariance(const LinearGaussianSystem& sys, Matrix& est_cov, Matrix& mean_cov,
                          const std::optional<Matrix>& R);

/// x̌' = A x̌ + B ǔ and the covariance recursions with R evaluated at x̌'.
/// Throws BoundaryViolation if ǔ or x̌' leaves its box, NumericalError if the
/// innovation covariance is singular.
Belief propagate_belief(const LinearGaussianSystem& sys, const Belief& belief, const Vector& control);

/// As propagate_belief, but returns nullopt on a bounds violation.
std::optional<Belief> try_propagate_belief(const LinearGaussianSystem& sys, const Belief& belief,
                                           const Vector& control);

struct NominalPlan {
    std::vector<Vector> controls;  // ǔ_0 .. ǔ_{T-1}
    std::vector<Vector> states;    // x̌_0 .. x̌_T

    /// Max |x̌_{k+1} - (A x̌_k + B ǔ_k)|.
    double residual(const LinearGaussianSystem& sys) const;
};

struct ClosedLoopTrace {
    std::vector<Vector> true_states;
    std::vector<Vector> estimates;
    std::vector<std::optional<Vector>> measurements;  // index k >= 1; [0] is empty
    std::vector<Vector> inputs;
    bool input_saturated = false;
    bool state_violation = false;
};

/// Draws x ~ N(mean, cov) for a PSD covariance.
Vector sample_gaussian(const Vector& mean, const Matrix& cov, std::mt19937_64& rng);

/// Executes `plan` with the trajectory-following controller
/// u_k = ǔ_k - K (x̂_k - x̌_k) (clamped to the input box), true dynamics with
/// process noise, and a Kalman filter on the noisy measurements. Measurement
/// availability and noise follow the zone of the true state.
ClosedLoopTrace simulate_closed_loop(const LinearGaussianSystem& sys, const NominalPlan& plan,
                                     const Vector& true_initial, const Vector& estimate_initial,
                                     const Matrix& estimate_cov, std::mt19937_64& rng);

}  // namespace simba
