#include "rigmaint/rigidity.hpp"

#include "rigmaint/errors.hpp"
#include "rigmaint/jacobi_eigen.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <string>

namespace rigmaint {

WeightedFramework::WeightedFramework(Graph graph, PositionMatrix positions, Eigen::VectorXd weights)
    : graph_(std::move(graph)), positions_(std::move(positions)), weights_(std::move(weights)) {
  if (positions_.rows() != graph_.vertex_count()) {
    throw InvalidArgument("position matrix has " + std::to_string(positions_.rows()) +
                          " rows for a " + std::to_string(graph_.vertex_count()) + "-vertex graph");
  }
  validate_positions(positions_);
  if (weights_.size() != graph_.edge_count()) {
    throw InvalidArgument("weight vector length " + std::to_string(weights_.size()) +
                          " does not match edge count " + std::to_string(graph_.edge_count()));
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw InvalidArgument("edge weights must be finite and nonnegative");
  }
}

WeightedFramework::WeightedFramework(Graph graph, PositionMatrix positions)
    : WeightedFramework(graph, std::move(positions), Eigen::VectorXd::Ones(graph.edge_count())) {}

Eigen::MatrixXd rigidity_matrix(const Graph& g, const PositionMatrix& p) {
  const int n = g.vertex_count();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(g.edge_count(), 3 * n);
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edge(k);
    const Eigen::RowVector3d d = p.row(e.tail) - p.row(e.head);
    r.block<1, 3>(k, 3 * e.tail) = d;
    r.block<1, 3>(k, 3 * e.head) = -d;
  }
  return r;
}

Eigen::MatrixXd rigidity_matrix_from_local_incidence(const Graph& g, const PositionMatrix& p) {
  const int n = g.vertex_count();
  const int m = g.edge_count();
  Eigen::MatrixXd stacked(m, n * n);
  for (int i = 0; i < n; ++i) stacked.block(0, i * n, m, n) = local_incidence_matrix(g, i).transpose();
  // I_n kron p(V): block-diagonal with n copies of the n x 3 position matrix.
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(n * n, 3 * n);
  for (int i = 0; i < n; ++i) kron.block(i * n, 3 * i, n, 3) = p;
  return stacked * kron;
}

Eigen::MatrixXd weighted_rigidity_matrix(const WeightedFramework& wf) {
  return wf.weights().asDiagonal() * rigidity_matrix(wf.graph(), wf.positions());
}

Graph unweighted_counterpart(const WeightedFramework& wf, double tau_w) {
  std::vector<std::pair<int, int>> kept;
  for (int k = 0; k < wf.edge_count(); ++k) {
    if (wf.weights()(k) > tau_w) kept.emplace_back(wf.graph().edge(k).tail, wf.graph().edge(k).head);
  }
  return Graph(wf.vertex_count(), kept);
}

Eigen::MatrixXd symmetric_rigidity_matrix(const WeightedFramework& wf) {
  const Eigen::MatrixXd rw = weighted_rigidity_matrix(wf);
  Eigen::MatrixXd s = rw.transpose() * rw;
  // Exact symmetry regardless of summation order.
  return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd coordinate_permutation(int n) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < n; ++i) p(s * n + i, 3 * i + s) = 1.0;
  }
  return p;
}

Eigen::MatrixXd permuted_laplacian_form(const WeightedFramework& wf) {
  const Graph& g = wf.graph();
  const int n = g.vertex_count();
  const int m = g.edge_count();
  const Eigen::MatrixXd e = incidence_matrix(g);
  const Eigen::MatrixXd ew = e * wf.weights().asDiagonal();

  std::array<Eigen::VectorXd, 3> q;
  for (int s = 0; s < 3; ++s) {
    q[static_cast<std::size_t>(s)].resize(m);
    for (int k = 0; k < m; ++k) {
      q[static_cast<std::size_t>(s)](k) = wf.positions()(g.edge(k).tail, s) - wf.positions()(g.edge(k).head, s);
    }
  }
  Eigen::MatrixXd big_q = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  for (int s = 0; s < 3; ++s) {
    for (int t = 0; t < 3; ++t) {
      big_q.block(s * m, t * m, m, m) =
          (q[static_cast<std::size_t>(s)].array() * q[static_cast<std::size_t>(t)].array()).matrix().asDiagonal();
    }
  }
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(3 * n, 3 * m);
  for (int s = 0; s < 3; ++s) left.block(s * n, s * m, n, m) = ew;
  return left * big_q * left.transpose();
}

int numerical_rank(const Eigen::MatrixXd& m, double rank_rel_tol) {
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double cut = rank_rel_tol * sv(0);
  return static_cast<int>((sv.array() > cut).count());
}

Eigen::MatrixXd null_space_basis(const PositionMatrix& p, const Vec3& center, double rank_rel_tol) {
  const auto n = p.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(3 * n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 r = p.row(i).transpose() - center;
    for (int s = 0; s < 3; ++s) t(3 * i + s, s) = 1.0;
    // xy rotation: (r_y, -r_x, 0)
    t(3 * i + 0, 3) = r.y();
    t(3 * i + 1, 3) = -r.x();
    // xz rotation: (r_z, 0, -r_x)
    t(3 * i + 0, 4) = r.z();
    t(3 * i + 2, 4) = -r.x();
    // yz rotation: (0, r_z, -r_y)
    t(3 * i + 1, 5) = r.z();
    t(3 * i + 2, 5) = -r.y();
  }
  if (numerical_rank(t, rank_rel_tol) < 6) {
    throw CollinearConfiguration("rigid-motion basis is rank deficient: points are collinear");
  }
  return t;
}

RigidityReport rigidity_report(const WeightedFramework& wf, const RigidityOptions& options) {
  const int n = wf.vertex_count();
  RigidityReport report;
  const Eigen::MatrixXd rw = weighted_rigidity_matrix(wf);
  report.rank = numerical_rank(rw, options.rank_rel_tol);
  report.rank_rigid = report.rank == 3 * n - 6;

  const SymmetricEigen eig = jacobi_eigen(symmetric_rigidity_matrix(wf));
  report.eigenvalues = eig.values;
  report.lambda7 = eig.values(6);
  report.lambda8 = 3 * n > 7 ? eig.values(7) : eig.values(6);
  report.gap = report.lambda8 - report.lambda7;
  report.eigvec7 = eig.vectors.col(6);
  report.is_rigid = report.lambda7 > options.tau_rigid;

  const Vec3 centroid = wf.positions().colwise().mean().transpose();
  try {
    report.null_space = null_space_basis(wf.positions(), centroid, options.rank_rel_tol);
  } catch (const CollinearConfiguration&) {
    report.null_space.resize(0, 0);
  }
  return report;
}

double edge_strain(const Vec3& d, const Vec3& dv) {
  const double c = d.dot(dv);
  return c * c;
}

Vec3 edge_strain_gradient(const Vec3& d, const Vec3& dv) { return 2.0 * d.dot(dv) * dv; }

double strain_energy(const WeightedFramework& wf, const Eigen::VectorXd& v) {
  double total = 0.0;
  for (int k = 0; k < wf.edge_count(); ++k) {
    const Edge& e = wf.graph().edge(k);
    const Vec3 d = (wf.positions().row(e.tail) - wf.positions().row(e.head)).transpose();
    const Vec3 dv = block3(v, e.tail) - block3(v, e.head);
    const double w = wf.weights()(k);
    total += w * w * edge_strain(d, dv);
  }
  return total;
}

Eigen::MatrixX3d lambda7_gradient_analytic(const WeightedFramework& wf, const Eigen::VectorXd& v,
                                           const WeightGradientProvider& weight_gradients) {
  const int n = wf.vertex_count();
  Eigen::MatrixX3d grad = Eigen::MatrixX3d::Zero(n, 3);
  for (int k = 0; k < wf.edge_count(); ++k) {
    const Edge& e = wf.graph().edge(k);
    const double w = wf.weights()(k);
    const Vec3 d = (wf.positions().row(e.tail) - wf.positions().row(e.head)).transpose();
    const Vec3 dv = block3(v, e.tail) - block3(v, e.head);
    const Vec3 g = w * w * edge_strain_gradient(d, dv);
    grad.row(e.tail) += g.transpose();
    grad.row(e.head) -= g.transpose();
    if (weight_gradients && w != 0.0) {
      const Eigen::MatrixX3d dw = weight_gradients(k);
      grad += 2.0 * w * edge_strain(d, dv) * dw;
    }
  }
  return grad;
}

}  // namespace rigmaint
