#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace rigmaint {

using Vec3 = Eigen::Vector3d;
/// n x 3 position matrix; row i is the position of vertex i in meters.
using PositionMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// An oriented edge. The tail carries +1 in the incidence matrix.
struct Edge {
  int tail = 0;
  int head = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Simple undirected graph with a fixed edge labeling 0..m-1.
///
/// Every edge is stored with tail = min(i, j) and head = max(i, j). The edge
/// order is whatever the caller supplied; `from_pairs` sorts
/// lexicographically. Construction rejects n < 3, self-loops, duplicate
/// edges and out-of-range vertices with InvalidGraph.
class Graph {
 public:
  Graph(int vertex_count, const std::vector<std::pair<int, int>>& edges);

  static Graph from_pairs(int vertex_count, std::vector<std::pair<int, int>> edges);
  static Graph complete(int vertex_count);

  int vertex_count() const noexcept { return n_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(int k) const { return edges_.at(static_cast<std::size_t>(k)); }

  std::optional<int> edge_index(int u, int v) const;
  /// Indices of edges incident to v, in label order.
  const std::vector<int>& incident_edges(int v) const;
  std::vector<int> neighbors(int v) const;
  int degree(int v) const;
  bool is_connected() const;
  int component_count() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> incident_;
};

/// Obstacles are point sets; extended geometry must be sampled by the caller.
struct ObstacleSet {
  std::vector<Vec3> points;
  bool empty() const noexcept { return points.empty(); }
};

/// n x m signed incidence matrix, +1 at the tail and -1 at the head.
Eigen::MatrixXd incidence_matrix(const Graph& g);

/// Incidence matrix of the directed local graph at `vertex`: columns of
/// edges not touching the vertex are kept as zero placeholders, and incident
/// edges are re-oriented so that `vertex` is the tail.
Eigen::MatrixXd local_incidence_matrix(const Graph& g, int vertex);

double pairwise_distance(const PositionMatrix& p, int i, int j);

void validate_positions(const PositionMatrix& p);
void validate_obstacles(const ObstacleSet& obstacles);

/// Closest approach between segment [a, b] and a point set.
struct SegmentProximity {
  double distance = 0.0;
  /// Parameter of the closest point a + t (b - a), t in [0, 1].
  double t = 0.0;
  /// Index of the closest obstacle point, -1 when the set is empty.
  int obstacle = -1;
  /// closest segment point minus obstacle point.
  Vec3 offset = Vec3::Zero();
};

SegmentProximity segment_proximity(const Vec3& a, const Vec3& b, const ObstacleSet& obstacles);

/// Distance from segment [a, b] to the closest obstacle point, +infinity for
/// an empty set. a == b (within 1e-12) degrades to a point distance.
double segment_obstacle_distance(const Vec3& a, const Vec3& b, const ObstacleSet& obstacles);

}  // namespace rigmaint
