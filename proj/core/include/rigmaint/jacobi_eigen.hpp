#pragma once

#include <Eigen/Dense>

namespace rigmaint {

struct SymmetricEigen {
  /// Ascending.
  Eigen::VectorXd values;
  /// Column k is the unit eigenvector of values(k).
  Eigen::MatrixXd vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi diagonalization of a dense symmetric matrix.
///
/// Only the upper triangle is trusted; the input is symmetrized first. Each
/// eigenvector is sign-normalized so that its largest-magnitude component is
/// positive, which keeps results reproducible across runs.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tolerance = 1e-14,
                            int max_sweeps = 100);

}  // namespace rigmaint
