/**
 * @file lp.hpp
 * @brief Small dense two-phase simplex for the geometric feasibility queries
 *        (region overlap, boundedness, containment, inradius).
 */
#pragma once

#include <Eigen/Dense>

namespace simba::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;
};

/// maximize c'x subject to A x <= b, x free. Bland's rule; sized for tens of
/// constraints in a handful of dimensions.
Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace simba::lp
