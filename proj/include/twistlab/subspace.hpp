#pragma once

#include <Eigen/Dense>

namespace twistlab::linalg {

/// Orthonormal basis of the column span, rank-revealed by SVD at `tol` on the
/// singular values (relative to the largest).
Eigen::MatrixXd orthonormalColumns(const Eigen::MatrixXd& a, double tol = 1e-10);

/// Orthonormal basis of the null space of `a`.
Eigen::MatrixXd kernel(const Eigen::MatrixXd& a, double tol = 1e-10);

int rank(const Eigen::MatrixXd& a, double tol = 1e-10);

}  // namespace twistlab::linalg
