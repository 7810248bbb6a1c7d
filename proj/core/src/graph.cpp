#include "rigmaint/graph.hpp"

#include "rigmaint/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace rigmaint {

Graph::Graph(int vertex_count, const std::vector<std::pair<int, int>>& edges)
    : n_(vertex_count), incident_(static_cast<std::size_t>(std::max(vertex_count, 0))) {
  if (vertex_count < 3) {
    throw InvalidGraph("graph needs at least 3 vertices, got " + std::to_string(vertex_count));
  }
  std::set<std::pair<int, int>> seen;
  edges_.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_) {
      throw InvalidGraph("edge {" + std::to_string(a) + "," + std::to_string(b) +
                         "} references a vertex outside 0.." + std::to_string(n_ - 1));
    }
    if (a == b) {
      throw InvalidGraph("self-loop at vertex " + std::to_string(a));
    }
    const Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.emplace(e.tail, e.head).second) {
      throw InvalidGraph("duplicate edge {" + std::to_string(e.tail) + "," +
                         std::to_string(e.head) + "}");
    }
    const int k = static_cast<int>(edges_.size());
    edges_.push_back(e);
    incident_[static_cast<std::size_t>(e.tail)].push_back(k);
    incident_[static_cast<std::size_t>(e.head)].push_back(k);
  }
}

Graph Graph::from_pairs(int vertex_count, std::vector<std::pair<int, int>> edges) {
  for (auto& [a, b] : edges) {
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  return Graph(vertex_count, edges);
}

Graph Graph::complete(int vertex_count) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < vertex_count; ++i) {
    for (int j = i + 1; j < vertex_count; ++j) edges.emplace_back(i, j);
  }
  return Graph(vertex_count, edges);
}

std::optional<int> Graph::edge_index(int u, int v) const {
  if (u < 0 || u >= n_) return std::nullopt;
  for (int k : incident_[static_cast<std::size_t>(u)]) {
    const Edge& e = edges_[static_cast<std::size_t>(k)];
    if ((e.tail == u && e.head == v) || (e.tail == v && e.head == u)) return k;
  }
  return std::nullopt;
}

const std::vector<int>& Graph::incident_edges(int v) const {
  if (v < 0 || v >= n_) {
    throw VertexOutOfRange("vertex " + std::to_string(v) + " out of range");
  }
  return incident_[static_cast<std::size_t>(v)];
}

std::vector<int> Graph::neighbors(int v) const {
  std::vector<int> out;
  for (int k : incident_edges(v)) {
    const Edge& e = edges_[static_cast<std::size_t>(k)];
    out.push_back(e.tail == v ? e.head : e.tail);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Graph::degree(int v) const { return static_cast<int>(incident_edges(v).size()); }

int Graph::component_count() const {
  std::vector<int> parent(static_cast<std::size_t>(n_));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  int components = n_;
  for (const Edge& e : edges_) {
    const int a = find(e.tail);
    const int b = find(e.head);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --components;
    }
  }
  return components;
}

bool Graph::is_connected() const { return component_count() == 1; }

Eigen::MatrixXd incidence_matrix(const Graph& g) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(g.vertex_count(), g.edge_count());
  for (int k = 0; k < g.edge_count(); ++k) {
    e(g.edge(k).tail, k) = 1.0;
    e(g.edge(k).head, k) = -1.0;
  }
  return e;
}

Eigen::MatrixXd local_incidence_matrix(const Graph& g, int vertex) {
  if (vertex < 0 || vertex >= g.vertex_count()) {
    throw VertexOutOfRange("local incidence requested for vertex " + std::to_string(vertex) +
                           " of a " + std::to_string(g.vertex_count()) + "-vertex graph");
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(g.vertex_count(), g.edge_count());
  for (int k : g.incident_edges(vertex)) {
    const Edge& edge = g.edge(k);
    e(vertex, k) = 1.0;
    e(edge.tail == vertex ? edge.head : edge.tail, k) = -1.0;
  }
  return e;
}

double pairwise_distance(const PositionMatrix& p, int i, int j) {
  return (p.row(i) - p.row(j)).norm();
}

void validate_positions(const PositionMatrix& p) {
  if (!p.allFinite()) throw InvalidArgument("position matrix has non-finite entries");
}

void validate_obstacles(const ObstacleSet& obstacles) {
  for (const Vec3& o : obstacles.points) {
    if (!o.allFinite()) throw InvalidArgument("obstacle point has non-finite coordinates");
  }
}

SegmentProximity segment_proximity(const Vec3& a, const Vec3& b, const ObstacleSet& obstacles) {
  SegmentProximity best;
  best.distance = std::numeric_limits<double>::infinity();
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const bool degenerate = len2 < 1e-24;
  for (std::size_t k = 0; k < obstacles.points.size(); ++k) {
    const Vec3& o = obstacles.points[k];
    double t = 0.0;
    if (!degenerate) t = std::clamp((o - a).dot(ab) / len2, 0.0, 1.0);
    const Vec3 offset = a + t * ab - o;
    const double d = offset.norm();
    if (d < best.distance) {
      best.distance = d;
      best.t = t;
      best.obstacle = static_cast<int>(k);
      best.offset = offset;
    }
  }
  return best;
}

double segment_obstacle_distance(const Vec3& a, const Vec3& b, const ObstacleSet& obstacles) {
  return segment_proximity(a, b, obstacles).distance;
}

}  // namespace rigmaint
