#pragma once

#include "rigmaint/graph.hpp"
#include "rigmaint/rigidity.hpp"

#include <vector>

namespace rigmaint {

/// Shape parameters of the state-dependent edge weights, all in meters.
struct WeightParams {
  double D = 6.0;           ///< sensing range
  double l_min = 1.0;       ///< minimum safety / line-of-sight distance
  double l_0 = 4.0;         ///< desired inter-agent distance
  double delta_a = 1.0;     ///< width of the range fade below D
  double delta_b = 1.0;     ///< width of the rise above l_min (occlusion and clearance)
  double sigma_beta = 1.0;  ///< Gaussian width of the spacing term

  /// Throws InvalidArgument unless 0 < l_min < l_0 < D, widths > 0,
  /// delta_a < D - l_0 and delta_b < l_0 - l_min.
  void validate() const;
};

/// C1 transition 3t^2 - 2t^3 on [0, 1]; the input is clamped first.
double smoothstep(double t);
double smoothstep_derivative(double t);

/// Range fade: 1 up to D - delta_a, exactly 0 from D on.
double gamma_a(double l_uv, const WeightParams& params);
double gamma_a_derivative(double l_uv, const WeightParams& params);

/// Line-of-sight term on the segment-obstacle distance: 0 up to l_min, 1 from
/// l_min + delta_b on. +infinity (no obstacles) gives 1.
double gamma_b(double l_uvo, const WeightParams& params);
double gamma_b_derivative(double l_uvo, const WeightParams& params);

/// Spacing term exp(-(l - l_0)^2 / (2 sigma^2)), maximal at l_0.
double beta(double l_uv, const WeightParams& params);
double beta_derivative(double l_uv, const WeightParams& params);

/// One clearance factor s((l - l_min) / delta_b) entering alpha.
double clearance_factor(double l, const WeightParams& params);
double clearance_factor_derivative(double l, const WeightParams& params);

/// Candidate neighbors of u: within sensing range and with an unoccluded
/// line of sight (segment-obstacle distance above l_min). Sorted.
std::vector<int> candidate_neighbors(int u, const PositionMatrix& p, const ObstacleSet& obstacles,
                                     const WeightParams& params);

/// Collision-clearance product of one agent: the clearance factors of its
/// distances to every candidate neighbor and to every obstacle point.
/// alpha_uv = c_u * c_v.
struct AgentClearance {
  double value = 1.0;
  /// n x 3, row i = dc_u/dp_i.
  Eigen::MatrixX3d gradient;
};

AgentClearance agent_clearance(int u, const PositionMatrix& p, const ObstacleSet& obstacles,
                               const WeightParams& params);

double alpha(int u, int v, const PositionMatrix& p, const ObstacleSet& obstacles,
             const WeightParams& params);

/// W_uv = alpha * beta * gamma_a * gamma_b, in [0, 1], bitwise symmetric in (u, v).
double weight(int u, int v, const PositionMatrix& p, const ObstacleSet& obstacles,
              const WeightParams& params);

/// dW_uv / dp_wrt. Exactly zero unless wrt is u, v or a candidate neighbor of either.
Vec3 weight_gradient(int u, int v, const PositionMatrix& p, const ObstacleSet& obstacles,
                     const WeightParams& params, int wrt);

/// All rows of dW_uv / dp at once (n x 3).
Eigen::MatrixX3d weight_gradient_matrix(int u, int v, const PositionMatrix& p,
                                        const ObstacleSet& obstacles, const WeightParams& params);

/// Weights and weight gradients for every edge of a graph, sharing the
/// per-agent clearance products.
class WeightField {
 public:
  WeightField(Graph graph, PositionMatrix positions, ObstacleSet obstacles, WeightParams params);

  const Graph& graph() const noexcept { return graph_; }
  const PositionMatrix& positions() const noexcept { return positions_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double weight(int edge) const { return weights_(edge); }
  const std::vector<int>& candidates(int u) const { return candidates_.at(static_cast<std::size_t>(u)); }
  const AgentClearance& clearance(int u) const { return clearance_.at(static_cast<std::size_t>(u)); }

  /// n x 3 gradient of the edge weight.
  Eigen::MatrixX3d gradient(int edge) const;
  Vec3 gradient(int edge, int vertex) const;

  /// Vertices j with W_ij > tau_w over edges of the graph. Sorted.
  std::vector<int> positive_neighbors(int i, double tau_w = 1e-12) const;
  int positive_edge_count(double tau_w = 1e-12) const;

  WeightedFramework framework() const { return WeightedFramework(graph_, positions_, weights_); }
  WeightGradientProvider gradient_provider() const;

 private:
  Graph graph_;
  PositionMatrix positions_;
  ObstacleSet obstacles_;
  WeightParams params_;
  std::vector<std::vector<int>> candidates_;
  std::vector<AgentClearance> clearance_;
  Eigen::VectorXd weights_;
};

}  // namespace rigmaint
