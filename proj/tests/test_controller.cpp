#include "rigmaint/controller.hpp"
#include "rigmaint/errors.hpp"
#include "rigmaint/rigidity.hpp"
#include "rigmaint/weights.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace rigmaint;

namespace {

const WeightParams kWeights{};

// Agents and obstacles pairwise at least l_min + delta_b apart, so every
// clearance product is saturated and each weight depends only on its own
// edge. Pair distances still span the spacing, range and occlusion shapes.
struct Scene {
  PositionMatrix p;
  ObstacleSet obs;
};

Scene saturated_scene(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  const double clear = kWeights.l_min + kWeights.delta_b + 0.1;
  for (;;) {
    Scene s;
    s.p = testutil::random_positions(rng, n, 3.5);
    s.obs.points = {Vec3(u(rng), u(rng), u(rng))};
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      for (int j = i + 1; j < n && ok; ++j) ok = pairwise_distance(s.p, i, j) > clear;
      ok = ok && (s.p.row(i).transpose() - s.obs.points[0]).norm() > clear;
    }
    if (!ok) continue;
    const WeightField f(Graph::complete(n), s.p, s.obs, kWeights);
    const RigidityReport r = rigidity_report(f.framework());
    if (r.is_rigid && r.gap > 0.05) return s;
  }
}

struct OracleSetup {
  WeightField field;
  RigidityReport report;
  PacketTable table;
  int center = 0;
};

// Exact relative positions and the unit eigenvector in every packet.
OracleSetup oracle_setup(const Scene& s, const Vec3& shift = Vec3::Zero()) {
  const int n = static_cast<int>(s.p.rows());
  WeightField field(Graph::complete(n), s.p, s.obs, kWeights);
  const RigidityReport rep = rigidity_report(field.framework());
  PacketTable table(n);
  for (int i = 0; i < n; ++i) {
    NeighborPacket pk;
    pk.sender = i;
    pk.p_hat = (s.p.row(i) - s.p.row(0)).transpose() + shift;
    pk.v_hat = rep.eigvec7.segment<3>(3 * i);
    table.put(pk);
  }
  return {std::move(field), rep, std::move(table), 0};
}

std::vector<ControlNeighbor> neighbors_of(const WeightField& f, int i) {
  std::vector<ControlNeighbor> out;
  for (int k : f.graph().incident_edges(i)) {
    const Edge& e = f.graph().edge(k);
    out.push_back({e.tail == i ? e.head : e.tail, f.weight(k), f.gradient(k, i)});
  }
  return out;
}

Eigen::MatrixX3d oracle_commands(const OracleSetup& o, double lambda_hat, const PotentialParams& pp) {
  const int n = o.field.graph().vertex_count();
  Eigen::MatrixX3d xi(n, 3);
  for (int i = 0; i < n; ++i) {
    const NeighborPacket& self = o.table.packet(i, i);
    ControlInput in{i, self.p_hat, self.v_hat, lambda_hat, 1.0 / (3.0 * n), true};
    xi.row(i) = control_velocity(in, neighbors_of(o.field, i), o.table, pp, n).xi.transpose();
  }
  return xi;
}

double lambda7_at(const PositionMatrix& p, const ObstacleSet& obs) {
  return rigidity_report(WeightField(Graph::complete(static_cast<int>(p.rows())), p, obs, kWeights).framework())
      .lambda7;
}

}  // namespace

TEST(Potential, Validation) {
  EXPECT_NO_THROW(PotentialParams{}.validate());
  PotentialParams p;
  p.b = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Potential, TailVanishes) {
  const PotentialParams p{};
  EXPECT_LT(potential(p.lambda_min + 100.0 / p.b, p), 1e-8);
  EXPECT_LT(std::abs(potential_derivative(p.lambda_min + 100.0 / p.b, p)), 1e-8);
  EXPECT_EQ(potential_derivative(1e6, p), 0.0);
  EXPECT_EQ(potential(1e6, p), 0.0);
}

TEST(Potential, ClampCap) {
  const PotentialParams p{};
  const double at_clamp = 1.0 / std::tanh(p.b * p.eps_clamp) - 1.0;
  EXPECT_NEAR(potential(p.lambda_min + p.eps_clamp, p), at_clamp, 1e-9 * at_clamp);
  EXPECT_EQ(potential(p.lambda_min - 3.0, p), potential(p.lambda_min + p.eps_clamp, p));
  EXPECT_EQ(potential(std::numeric_limits<double>::quiet_NaN(), p), potential(p.lambda_min + p.eps_clamp, p));
  EXPECT_TRUE(std::isfinite(potential_derivative(-1e9, p)));
  EXPECT_TRUE(clamp_estimate(p.lambda_min, p).clamped);
  EXPECT_FALSE(clamp_estimate(p.lambda_min + 1.0, p).clamped);
}

TEST(Potential, StrictlyDecreasingAndDerivativeMatches) {
  const PotentialParams p{};
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const double l = p.lambda_min + 0.01 + 0.02 * k;
    const double v = potential(l, p);
    EXPECT_LT(v, prev);
    prev = v;
    const double h = 1e-6;
    const double fd = (potential(l + h, p) - potential(l - h, p)) / (2 * h);
    EXPECT_NEAR(potential_derivative(l, p), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    EXPECT_LT(potential_derivative(l, p), 0.0 + (v == 0.0 ? 1.0 : 0.0));
  }
}

TEST(Control, NotReadyThrows) {
  PacketTable table(3);
  ControlInput in;
  in.self = 0;
  EXPECT_THROW(control_velocity(in, {}, table, PotentialParams{}, 3), EstimatorNotReady);
}

TEST(Control, VanishesForLargeEigenvalue) {
  std::mt19937_64 rng(61);
  const OracleSetup o = oracle_setup(saturated_scene(rng, 6));
  const Eigen::MatrixX3d xi = oracle_commands(o, 1e3, PotentialParams{});
  EXPECT_LT(xi.rowwise().norm().maxCoeff(), 1e-6);
}

TEST(Control, OracleEstimatesReproduceAnalyticGradient) {
  std::mt19937_64 rng(62);
  PotentialParams pp;
  pp.lambda_min = 0.01;
  for (int trial = 0; trial < 10; ++trial) {
    const Scene s = saturated_scene(rng, 6);
    const OracleSetup o = oracle_setup(s);
    const double lam = o.report.lambda7;
    const Eigen::MatrixX3d grad =
        lambda7_gradient_analytic(o.field.framework(), o.report.eigvec7, o.field.gradient_provider());
    const Eigen::MatrixX3d expected = -potential_derivative(lam, pp) * grad;
    const Eigen::MatrixX3d xi = oracle_commands(o, lam, pp);
    EXPECT_LT(testutil::max_abs(xi - expected), 1e-6 * testutil::max_abs(expected)) << "trial " << trial;
  }
}

TEST(Control, ZeroSumWithoutObstacles) {
  // Fixed obstacles break translation invariance; without them the commands sum to zero.
  std::mt19937_64 rng(66);
  PotentialParams pp;
  pp.lambda_min = 0.01;
  for (int trial = 0; trial < 10; ++trial) {
    Scene s = saturated_scene(rng, 6);
    s.obs.points.clear();
    const OracleSetup o = oracle_setup(s);
    const Eigen::MatrixX3d xi = oracle_commands(o, o.report.lambda7, pp);
    EXPECT_LT(xi.colwise().sum().cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, testutil::max_abs(xi)));
  }
}

TEST(Control, TranslationInvariance) {
  std::mt19937_64 rng(63);
  const Scene s = saturated_scene(rng, 6);
  const OracleSetup a = oracle_setup(s);
  const OracleSetup b = oracle_setup(s, Vec3(12.0, -7.0, 3.5));
  PotentialParams pp;
  pp.lambda_min = 0.01;
  const double lam = a.report.lambda7;
  EXPECT_LT(testutil::max_abs(oracle_commands(a, lam, pp) - oracle_commands(b, lam, pp)), 1e-10);
}

TEST(Control, AscentProperty) {
  std::mt19937_64 rng(64);
  PotentialParams pp;
  pp.lambda_min = 0.01;
  int ascended = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Scene s = saturated_scene(rng, 6);
    const OracleSetup o = oracle_setup(s);
    const double lam = o.report.lambda7;
    const Eigen::MatrixX3d xi = oracle_commands(o, lam, pp);
    const double h = 1e-5 / std::max(1.0, testutil::max_abs(xi));
    const double plus = lambda7_at(s.p + h * xi, s.obs);
    const double minus = lambda7_at(s.p - h * xi, s.obs);
    const double directional = (plus - minus) / (2 * h);
    EXPECT_GE(directional, -1e-9) << "trial " << trial;
    ascended += directional > 0.0;
  }
  EXPECT_EQ(ascended, 50);
}

TEST(Control, ClampedInputStaysFinite) {
  std::mt19937_64 rng(65);
  const OracleSetup o = oracle_setup(saturated_scene(rng, 6));
  const PotentialParams pp{};
  const int n = 6;
  for (double lam : {-50.0, 0.0, pp.lambda_min, std::numeric_limits<double>::quiet_NaN()}) {
    for (int i = 0; i < n; ++i) {
      const NeighborPacket& self = o.table.packet(i, i);
      const auto nbs = neighbors_of(o.field, i);
      const ControlInput in{i, self.p_hat, self.v_hat, lam, 1.0 / (3.0 * n), true};
      const ControlOutput out = control_velocity(in, nbs, o.table, pp, n);
      EXPECT_TRUE(out.clamped);
      EXPECT_EQ(out.lambda_used, pp.lambda_min + pp.eps_clamp);
      EXPECT_TRUE(out.xi.allFinite());
      const double bound = std::abs(potential_derivative(pp.lambda_min + pp.eps_clamp, pp)) *
                           local_lambda7_gradient(in, nbs, o.table, n).norm();
      EXPECT_LE(out.xi.norm(), bound * (1.0 + 1e-12));
    }
  }
}

TEST(Exogenous, EmptyScheduleIsIdentity) {
  EXPECT_EQ(exogenous_velocity({}, 0, 1.0, 0.5), Vec3::Zero());
  EXPECT_EQ(apply_exogenous(Vec3(1, 2, 3), exogenous_velocity({}, 0, 1.0, 0.5)), Vec3(1, 2, 3));
}

TEST(Exogenous, ConstantOffset) {
  const std::vector<ExogenousSchedule> s = {{1, {{0.0, 100.0, Vec3(0.1, 0, 0)}}}};
  EXPECT_EQ(apply_exogenous(Vec3(1, 1, 1), exogenous_velocity(s, 1, 3.0, 0.5)), Vec3(1.1, 1, 1));
  EXPECT_EQ(exogenous_velocity(s, 0, 3.0, 0.5), Vec3::Zero());
}

TEST(Exogenous, LeftClosedSegments) {
  const std::vector<ExogenousSchedule> s = {
      {2, {{0.0, 1.0, Vec3(0.1, 0, 0)}, {1.0, 2.5, Vec3(0, 0.2, 0)}, {3.0, 4.0, Vec3(0, 0, -0.3)}}}};
  EXPECT_EQ(exogenous_velocity(s, 2, 0.0, 0.0), Vec3(0.1, 0, 0));
  EXPECT_EQ(exogenous_velocity(s, 2, 0.999, 0.0), Vec3(0.1, 0, 0));
  EXPECT_EQ(exogenous_velocity(s, 2, 1.0, 0.0), Vec3(0, 0.2, 0));
  EXPECT_EQ(exogenous_velocity(s, 2, 2.5, 0.0), Vec3::Zero());
  EXPECT_EQ(exogenous_velocity(s, 2, 3.0, 0.0), Vec3(0, 0, -0.3));
  EXPECT_EQ(exogenous_velocity(s, 2, 4.0, 0.0), Vec3::Zero());
  EXPECT_EQ(exogenous_velocity(s, 2, -0.1, 0.0), Vec3::Zero());
}

TEST(Exogenous, CapAndSaturation) {
  const std::vector<ExogenousSchedule> s = {{0, {{0.0, 1.0, Vec3(3, 4, 0)}}}};
  EXPECT_NEAR(exogenous_velocity(s, 0, 0.5, 0.5).norm(), 0.5, 1e-15);
  EXPECT_EQ(exogenous_velocity(s, 0, 0.5, 0.0), Vec3(3, 4, 0));
  const Vec3 v = saturate(Vec3(3, 4, 0), 1.0);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  EXPECT_NEAR(v.normalized().dot(Vec3(0.6, 0.8, 0)), 1.0, 1e-15);
  EXPECT_EQ(saturate(Vec3(0.1, 0, 0), 1.0), Vec3(0.1, 0, 0));
  EXPECT_EQ(saturate(Vec3::Zero(), 1.0), Vec3::Zero());
}
