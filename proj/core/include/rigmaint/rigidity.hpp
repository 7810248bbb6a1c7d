#pragma once

#include "rigmaint/graph.hpp"

#include <Eigen/Dense>

#include <functional>

namespace rigmaint {

/// Graph, embedding and one nonnegative weight per edge.
class WeightedFramework {
 public:
  WeightedFramework(Graph graph, PositionMatrix positions, Eigen::VectorXd weights);
  /// Unit weights on every edge.
  WeightedFramework(Graph graph, PositionMatrix positions);

  const Graph& graph() const noexcept { return graph_; }
  const PositionMatrix& positions() const noexcept { return positions_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  int vertex_count() const noexcept { return graph_.vertex_count(); }
  int edge_count() const noexcept { return graph_.edge_count(); }

 private:
  Graph graph_;
  PositionMatrix positions_;
  Eigen::VectorXd weights_;
};

struct RigidityOptions {
  /// Singular value sigma counts toward the rank iff sigma > rank_rel_tol * sigma_max.
  double rank_rel_tol = 1e-8;
  /// Rigidity eigenvalue threshold for the spectral verdict.
  double tau_rigid = 1e-7;
  /// Weights at or below this are modeled zeros.
  double tau_w = 1e-12;
};

struct RigidityReport {
  int rank = 0;
  /// Ascending eigenvalues of the symmetric rigidity matrix.
  Eigen::VectorXd eigenvalues;
  double lambda7 = 0.0;
  double lambda8 = 0.0;
  /// Unit eigenvector of lambda7, agent-major layout [x0 y0 z0 x1 ...].
  Eigen::VectorXd eigvec7;
  /// lambda8 - lambda7. Eigenvector-dependent outputs are ill-defined as this
  /// approaches zero.
  double gap = 0.0;
  /// Spectral verdict: lambda7 > tau_rigid.
  bool is_rigid = false;
  /// Rank verdict: rank == 3n - 6.
  bool rank_rigid = false;
  /// Six rigid-motion columns (3n x 6) about the framework centroid. Empty
  /// when the configuration is collinear.
  Eigen::MatrixXd null_space;
};

/// m x 3n rigidity matrix. Row k carries (p_tail - p_head) in the tail block
/// and its negation in the head block.
Eigen::MatrixXd rigidity_matrix(const Graph& g, const PositionMatrix& p);

/// The same matrix assembled from local incidence matrices,
/// [E_l(G_1)^T ... E_l(G_n)^T] (I_n kron p). Used as an independent route.
Eigen::MatrixXd rigidity_matrix_from_local_incidence(const Graph& g, const PositionMatrix& p);

Eigen::MatrixXd weighted_rigidity_matrix(const WeightedFramework& wf);

/// Keeps exactly the edges whose weight exceeds tau_w, preserving label order.
Graph unweighted_counterpart(const WeightedFramework& wf, double tau_w = 1e-12);

/// 3n x 3n positive-semidefinite R(p,W)^T R(p,W).
Eigen::MatrixXd symmetric_rigidity_matrix(const WeightedFramework& wf);

/// Permutation taking agent-major stacking to coordinate-major stacking:
/// (P x)[s n + i] = x[3 i + s].
Eigen::MatrixXd coordinate_permutation(int n);

/// (I_3 kron E W) Q(p) (I_3 kron W E^T) with the Q_s Q_t diagonal blocks.
/// Equals P * symmetric_rigidity_matrix * P^T.
Eigen::MatrixXd permuted_laplacian_form(const WeightedFramework& wf);

/// 3n x 6 null-space basis in agent-major layout: three translations and
/// three infinitesimal rotations about `center`.
/// Throws CollinearConfiguration if the six columns have rank < 6.
Eigen::MatrixXd null_space_basis(const PositionMatrix& p, const Vec3& center,
                                 double rank_rel_tol = 1e-8);

int numerical_rank(const Eigen::MatrixXd& m, double rank_rel_tol = 1e-8);

RigidityReport rigidity_report(const WeightedFramework& wf, const RigidityOptions& options = {});

/// Per-edge strain (d . dv)^2 for position difference d = p_i - p_j and
/// eigenvector difference dv = v_i - v_j. Expands to the six quadratic terms
/// sum_s sum_t d_s d_t dv_s dv_t. The rigidity eigenvalue is
/// sum_e W_e^2 * edge_strain(d_e, dv_e) for a unit eigenvector.
double edge_strain(const Vec3& d, const Vec3& dv);

/// Derivative of edge_strain with respect to p_i: 2 (d . dv) dv.
Vec3 edge_strain_gradient(const Vec3& d, const Vec3& dv);

/// Sum over edges of W_e^2 * edge_strain, for any 3n vector v.
double strain_energy(const WeightedFramework& wf, const Eigen::VectorXd& v);

/// Returns the n x 3 matrix of dW_e / dp_i for edge e (zero rows for
/// uninvolved vertices).
using WeightGradientProvider = std::function<Eigen::MatrixX3d(int edge)>;

/// Analytic gradient of the rigidity eigenvalue, n x 3, row i = dlambda7/dp_i.
///
/// `v` must be the unit eigenvector of lambda7. The neighbor-sum term is
/// W_ij^2 * edge_strain_gradient, and state-dependent weights contribute
/// 2 W_e (dW_e/dp_i) edge_strain_e for every edge e. Without a provider the
/// weights are treated as constants.
Eigen::MatrixX3d lambda7_gradient_analytic(const WeightedFramework& wf, const Eigen::VectorXd& v,
                                           const WeightGradientProvider& weight_gradients = {});

/// Agent-major stacked vector view helpers.
inline Vec3 block3(const Eigen::VectorXd& v, int i) { return v.segment<3>(3 * i); }

}  // namespace rigmaint
