#include "rigmaint/weights.hpp"

#include "rigmaint/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace rigmaint {

void WeightParams::validate() const {
  const auto fail = [](const std::string& what) { throw InvalidArgument("weight parameters: " + what); };
  if (!(l_min > 0.0)) fail("l_min must be positive");
  if (!(l_min < l_0)) fail("l_min must be below l_0");
  if (!(l_0 < D)) fail("l_0 must be below D");
  if (!(delta_a > 0.0) || !(delta_b > 0.0) || !(sigma_beta > 0.0)) fail("widths must be positive");
  if (!(delta_a < D - l_0)) fail("delta_a must be below D - l_0");
  if (!(delta_b < l_0 - l_min)) fail("delta_b must be below l_0 - l_min");
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 6.0 * t * (1.0 - t);
}

double gamma_a(double l_uv, const WeightParams& params) {
  return 1.0 - smoothstep((l_uv - (params.D - params.delta_a)) / params.delta_a);
}

double gamma_a_derivative(double l_uv, const WeightParams& params) {
  return -smoothstep_derivative((l_uv - (params.D - params.delta_a)) / params.delta_a) / params.delta_a;
}

double gamma_b(double l_uvo, const WeightParams& params) {
  if (std::isinf(l_uvo)) return 1.0;
  return smoothstep((l_uvo - params.l_min) / params.delta_b);
}

double gamma_b_derivative(double l_uvo, const WeightParams& params) {
  if (std::isinf(l_uvo)) return 0.0;
  return smoothstep_derivative((l_uvo - params.l_min) / params.delta_b) / params.delta_b;
}

double beta(double l_uv, const WeightParams& params) {
  const double x = (l_uv - params.l_0) / params.sigma_beta;
  return std::exp(-0.5 * x * x);
}

double beta_derivative(double l_uv, const WeightParams& params) {
  return -(l_uv - params.l_0) / (params.sigma_beta * params.sigma_beta) * beta(l_uv, params);
}

double clearance_factor(double l, const WeightParams& params) {
  return smoothstep((l - params.l_min) / params.delta_b);
}

double clearance_factor_derivative(double l, const WeightParams& params) {
  return smoothstep_derivative((l - params.l_min) / params.delta_b) / params.delta_b;
}

std::vector<int> candidate_neighbors(int u, const PositionMatrix& p, const ObstacleSet& obstacles,
                                     const WeightParams& params) {
  std::vector<int> out;
  const Vec3 pu = p.row(u).transpose();
  for (int k = 0; k < p.rows(); ++k) {
    if (k == u) continue;
    const Vec3 pk = p.row(k).transpose();
    if ((pu - pk).norm() >= params.D) continue;
    if (segment_obstacle_distance(pu, pk, obstacles) <= params.l_min) continue;
    out.push_back(k);
  }
  return out;
}

namespace {

// One factor f(l) of a clearance product together with the unit direction
// dl/dp_owner and the vertex on the other end (-1 for obstacles).
struct ClearanceTerm {
  double value;
  double slope;
  Vec3 direction;
  int other;
};

AgentClearance clearance_from_candidates(int u, const std::vector<int>& candidates,
                                         const PositionMatrix& p, const ObstacleSet& obstacles,
                                         const WeightParams& params) {
  const Vec3 pu = p.row(u).transpose();
  std::vector<ClearanceTerm> terms;
  terms.reserve(candidates.size() + obstacles.points.size());
  auto add = [&](const Vec3& delta, int other) {
    const double l = delta.norm();
    const Vec3 dir = l > 0.0 ? Vec3(delta / l) : Vec3::Zero();
    terms.push_back({clearance_factor(l, params), clearance_factor_derivative(l, params), dir, other});
  };
  for (int k : candidates) add(pu - p.row(k).transpose(), k);
  for (const Vec3& o : obstacles.points) add(pu - o, -1);

  AgentClearance out;
  out.gradient = Eigen::MatrixX3d::Zero(p.rows(), 3);
  const std::size_t count = terms.size();
  // prefix[i] = prod of terms[0..i), suffix[i] = prod of terms[i..count).
  std::vector<double> prefix(count + 1, 1.0);
  std::vector<double> suffix(count + 1, 1.0);
  for (std::size_t i = 0; i < count; ++i) prefix[i + 1] = prefix[i] * terms[i].value;
  for (std::size_t i = count; i > 0; --i) suffix[i - 1] = suffix[i] * terms[i - 1].value;
  out.value = prefix[count];
  for (std::size_t i = 0; i < count; ++i) {
    if (terms[i].slope == 0.0) continue;
    const Vec3 g = prefix[i] * suffix[i + 1] * terms[i].slope * terms[i].direction;
    out.gradient.row(u) += g.transpose();
    if (terms[i].other >= 0) out.gradient.row(terms[i].other) -= g.transpose();
  }
  return out;
}

struct PairGeometry {
  double length;
  Vec3 direction;  // d length / d p_a
  SegmentProximity occlusion;
};

PairGeometry pair_geometry(int a, int b, const PositionMatrix& p, const ObstacleSet& obstacles,
                           bool need_occlusion) {
  PairGeometry g;
  const Vec3 pa = p.row(a).transpose();
  const Vec3 pb = p.row(b).transpose();
  const Vec3 delta = pa - pb;
  g.length = delta.norm();
  g.direction = g.length > 0.0 ? Vec3(delta / g.length) : Vec3::Zero();
  if (need_occlusion) {
    g.occlusion = segment_proximity(pa, pb, obstacles);
  } else {
    g.occlusion.distance = std::numeric_limits<double>::infinity();
  }
  return g;
}

double combine_weight(const AgentClearance& ca, const AgentClearance& cb, const PairGeometry& g,
                      const WeightParams& params) {
  const double ga = gamma_a(g.length, params);
  if (ga == 0.0) return 0.0;
  return ca.value * cb.value * beta(g.length, params) * ga * gamma_b(g.occlusion.distance, params);
}

Eigen::MatrixX3d combine_gradient(int a, int b, const AgentClearance& ca, const AgentClearance& cb,
                                  const PairGeometry& g, const WeightParams& params, Eigen::Index n) {
  Eigen::MatrixX3d grad = Eigen::MatrixX3d::Zero(n, 3);
  const double ga = gamma_a(g.length, params);
  if (ga == 0.0) return grad;
  const double be = beta(g.length, params);
  const double gb = gamma_b(g.occlusion.distance, params);
  const double spacing = be * ga;
  const double spacing_slope = beta_derivative(g.length, params) * ga + be * gamma_a_derivative(g.length, params);

  grad += (cb.value * spacing * gb) * ca.gradient;
  grad += (ca.value * spacing * gb) * cb.gradient;

  const double radial = ca.value * cb.value * spacing_slope * gb;
  grad.row(a) += radial * g.direction.transpose();
  grad.row(b) -= radial * g.direction.transpose();

  const double gb_slope = gamma_b_derivative(g.occlusion.distance, params);
  if (gb_slope != 0.0 && g.occlusion.obstacle >= 0) {
    const double dist = g.occlusion.offset.norm();
    if (dist > 0.0) {
      const Vec3 unit = g.occlusion.offset / dist;
      const double scale = ca.value * cb.value * spacing * gb_slope;
      grad.row(a) += (scale * (1.0 - g.occlusion.t)) * unit.transpose();
      grad.row(b) += (scale * g.occlusion.t) * unit.transpose();
    }
  }
  return grad;
}

}  // namespace

AgentClearance agent_clearance(int u, const PositionMatrix& p, const ObstacleSet& obstacles,
                               const WeightParams& params) {
  return clearance_from_candidates(u, candidate_neighbors(u, p, obstacles, params), p, obstacles, params);
}

double alpha(int u, int v, const PositionMatrix& p, const ObstacleSet& obstacles,
             const WeightParams& params) {
  const int a = std::min(u, v);
  const int b = std::max(u, v);
  return agent_clearance(a, p, obstacles, params).value * agent_clearance(b, p, obstacles, params).value;
}

double weight(int u, int v, const PositionMatrix& p, const ObstacleSet& obstacles,
              const WeightParams& params) {
  if (u == v) throw InvalidArgument("weight of a self pair");
  const int a = std::min(u, v);
  const int b = std::max(u, v);
  const PairGeometry g = pair_geometry(a, b, p, obstacles, true);
  if (gamma_a(g.length, params) == 0.0) return 0.0;
  return combine_weight(agent_clearance(a, p, obstacles, params), agent_clearance(b, p, obstacles, params), g,
                        params);
}

Eigen::MatrixX3d weight_gradient_matrix(int u, int v, const PositionMatrix& p,
                                        const ObstacleSet& obstacles, const WeightParams& params) {
  if (u == v) throw InvalidArgument("weight gradient of a self pair");
  const int a = std::min(u, v);
  const int b = std::max(u, v);
  const PairGeometry g = pair_geometry(a, b, p, obstacles, true);
  return combine_gradient(a, b, agent_clearance(a, p, obstacles, params),
                          agent_clearance(b, p, obstacles, params), g, params, p.rows());
}

Vec3 weight_gradient(int u, int v, const PositionMatrix& p, const ObstacleSet& obstacles,
                     const WeightParams& params, int wrt) {
  if (wrt < 0 || wrt >= p.rows()) throw VertexOutOfRange("gradient vertex out of range");
  return weight_gradient_matrix(u, v, p, obstacles, params).row(wrt).transpose();
}

WeightField::WeightField(Graph graph, PositionMatrix positions, ObstacleSet obstacles, WeightParams params)
    : graph_(std::move(graph)),
      positions_(std::move(positions)),
      obstacles_(std::move(obstacles)),
      params_(params) {
  if (positions_.rows() != graph_.vertex_count()) {
    throw InvalidArgument("weight field: position rows do not match vertex count");
  }
  const int n = graph_.vertex_count();
  candidates_.reserve(static_cast<std::size_t>(n));
  clearance_.reserve(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    candidates_.push_back(candidate_neighbors(u, positions_, obstacles_, params_));
    clearance_.push_back(clearance_from_candidates(u, candidates_.back(), positions_, obstacles_, params_));
  }
  weights_.resize(graph_.edge_count());
  for (int k = 0; k < graph_.edge_count(); ++k) {
    const Edge& e = graph_.edge(k);
    const double l = (positions_.row(e.tail) - positions_.row(e.head)).norm();
    // The occlusion query is only needed inside the sensing range.
    const PairGeometry g = pair_geometry(e.tail, e.head, positions_, obstacles_, gamma_a(l, params_) > 0.0);
    weights_(k) = combine_weight(clearance(e.tail), clearance(e.head), g, params_);
  }
}

Eigen::MatrixX3d WeightField::gradient(int edge) const {
  const Edge& e = graph_.edge(edge);
  const PairGeometry g = pair_geometry(e.tail, e.head, positions_, obstacles_, true);
  return combine_gradient(e.tail, e.head, clearance(e.tail), clearance(e.head), g, params_, positions_.rows());
}

Vec3 WeightField::gradient(int edge, int vertex) const { return gradient(edge).row(vertex).transpose(); }

std::vector<int> WeightField::positive_neighbors(int i, double tau_w) const {
  std::vector<int> out;
  for (int k : graph_.incident_edges(i)) {
    if (weights_(k) > tau_w) {
      const Edge& e = graph_.edge(k);
      out.push_back(e.tail == i ? e.head : e.tail);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int WeightField::positive_edge_count(double tau_w) const {
  return static_cast<int>((weights_.array() > tau_w).count());
}

WeightGradientProvider WeightField::gradient_provider() const {
  auto self = std::make_shared<const WeightField>(*this);
  return [self](int edge) { return self->gradient(edge); };
}

}  // namespace rigmaint
