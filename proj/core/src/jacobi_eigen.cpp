#include "rigmaint/jacobi_eigen.hpp"

#include "rigmaint/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rigmaint {

namespace {

double off_diagonal_norm2(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) s += 2.0 * a(i, j) * a(i, j);
  }
  return s;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tolerance, int max_sweeps) {
  if (input.rows() != input.cols()) throw InvalidArgument("jacobi_eigen needs a square matrix");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = input.triangularView<Eigen::Upper>();
  a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  const double target = tolerance * tolerance * scale * scale;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm2(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return a(l, l) < a(r, r); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    Eigen::VectorXd col = v.col(src);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

}  // namespace rigmaint
