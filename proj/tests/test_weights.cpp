#include "rigmaint/errors.hpp"
#include "rigmaint/weights.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace rigmaint;

namespace {

const WeightParams kParams{};  // D=6, l_min=1, l_0=4, delta_a=1, delta_b=1, sigma=1

PositionMatrix line_positions(std::initializer_list<double> xs) {
  PositionMatrix p(static_cast<Eigen::Index>(xs.size()), 3);
  p.setZero();
  int i = 0;
  for (double x : xs) p(i++, 0) = x;
  return p;
}

struct Scene {
  PositionMatrix p;
  ObstacleSet obs;
};

// Agents spread at roughly the desired spacing so that weights are generic.
Scene random_scene(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  Scene s;
  s.p = testutil::random_positions(rng, n, 3.5);
  for (int k = 0; k < 2; ++k) s.obs.points.emplace_back(u(rng), u(rng), u(rng));
  return s;
}

double fd_weight(int u, int v, Scene s, int i, int axis, double h) {
  Scene plus = s;
  Scene minus = s;
  plus.p(i, axis) += h;
  minus.p(i, axis) -= h;
  return (weight(u, v, plus.p, plus.obs, kParams) - weight(u, v, minus.p, minus.obs, kParams)) / (2 * h);
}

}  // namespace

TEST(Params, Validation) {
  EXPECT_NO_THROW(kParams.validate());
  WeightParams p;
  p.l_min = 5.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = WeightParams{};
  p.delta_a = 2.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = WeightParams{};
  p.delta_b = 3.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = WeightParams{};
  p.sigma_beta = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Smoothstep, EndpointsAndMidpoint) {
  EXPECT_EQ(smoothstep(0.0), 0.0);
  EXPECT_EQ(smoothstep(1.0), 1.0);
  EXPECT_EQ(smoothstep(0.5), 0.5);
  EXPECT_EQ(smoothstep(-3.0), 0.0);
  EXPECT_EQ(smoothstep(7.0), 1.0);
  EXPECT_EQ(smoothstep_derivative(0.0), 0.0);
  EXPECT_EQ(smoothstep_derivative(1.0), 0.0);
  double prev = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = k / 100.0;
    EXPECT_GE(smoothstep(t), prev);
    prev = smoothstep(t);
    EXPECT_NEAR(smoothstep_derivative(t), (smoothstep(t + 1e-7) - smoothstep(t - 1e-7)) / 2e-7, 1e-6);
  }
}

TEST(GammaA, ClosedForms) {
  EXPECT_EQ(gamma_a(6.0, kParams), 0.0);
  EXPECT_EQ(gamma_a(9.0, kParams), 0.0);
  EXPECT_EQ(gamma_a(4.0, kParams), 1.0);
  EXPECT_NEAR(gamma_a(5.5, kParams), 0.5, 1e-15);
}

TEST(GammaB, ClosedForms) {
  EXPECT_EQ(gamma_b(1.0, kParams), 0.0);
  EXPECT_EQ(gamma_b(0.2, kParams), 0.0);
  EXPECT_EQ(gamma_b(std::numeric_limits<double>::infinity(), kParams), 1.0);
  EXPECT_NEAR(gamma_b(1.5, kParams), 0.5, 1e-15);
  EXPECT_EQ(gamma_b(2.0, kParams), 1.0);
  EXPECT_EQ(gamma_b_derivative(std::numeric_limits<double>::infinity(), kParams), 0.0);
}

TEST(Beta, ClosedForms) {
  EXPECT_EQ(beta(4.0, kParams), 1.0);
  EXPECT_NEAR(beta(5.0, kParams), std::exp(-0.5), 1e-15);
  EXPECT_EQ(beta(3.3, kParams), beta(4.7, kParams));
  EXPECT_LT(beta(4.1, kParams), 1.0);
}

TEST(ShapeDerivatives, MatchFiniteDifferences) {
  const double h = 1e-7;
  for (double l = 0.05; l < 7.5; l += 0.0731) {
    EXPECT_NEAR(gamma_a_derivative(l, kParams), (gamma_a(l + h, kParams) - gamma_a(l - h, kParams)) / (2 * h), 1e-6);
    EXPECT_NEAR(gamma_b_derivative(l, kParams), (gamma_b(l + h, kParams) - gamma_b(l - h, kParams)) / (2 * h), 1e-6);
    EXPECT_NEAR(beta_derivative(l, kParams), (beta(l + h, kParams) - beta(l - h, kParams)) / (2 * h), 1e-6);
    EXPECT_NEAR(clearance_factor_derivative(l, kParams),
                (clearance_factor(l + h, kParams) - clearance_factor(l - h, kParams)) / (2 * h), 1e-6);
  }
}

TEST(Candidates, RangeAndOcclusion) {
  const PositionMatrix p = line_positions({0.0, 4.0, 7.0, -5.0});
  EXPECT_EQ(candidate_neighbors(0, p, {}, kParams), (std::vector<int>{1, 3}));
  // Obstacle on the segment 0-1 occludes the pair.
  const ObstacleSet obs{{Vec3(2.0, 0.5, 0.0)}};
  EXPECT_EQ(candidate_neighbors(0, p, obs, kParams), (std::vector<int>{3}));
  EXPECT_EQ(candidate_neighbors(1, p, obs, kParams), (std::vector<int>{2}));
}

TEST(Alpha, SaturatedAndVanishing) {
  PositionMatrix p = line_positions({0.0, 4.0, 8.0});
  EXPECT_EQ(alpha(0, 1, p, {}, kParams), 1.0);
  // Agent 2 within l_min of agent 1 switches alpha_01 off through c_1.
  p(2, 0) = 5.0;
  EXPECT_EQ(alpha(0, 1, p, {}, kParams), 0.0);
  EXPECT_EQ(weight(0, 1, p, {}, kParams), 0.0);
  // Half-way up the rise.
  p(2, 0) = 5.5;
  EXPECT_NEAR(alpha(0, 1, p, {}, kParams), 0.5, 1e-15);
}

TEST(Alpha, ObstacleClearanceCounts) {
  const PositionMatrix p = line_positions({0.0, 4.0});
  EXPECT_NEAR(alpha(0, 1, p, ObstacleSet{{Vec3(-1.5, 0, 0)}}, kParams), 0.5, 1e-15);
  EXPECT_EQ(alpha(0, 1, p, ObstacleSet{{Vec3(0, -1.0, 0)}}, kParams), 0.0);
}

TEST(Weight, ClosedForms) {
  const PositionMatrix p = line_positions({0.0, 4.0, 10.0});
  EXPECT_EQ(weight(0, 1, p, {}, kParams), 1.0);
  EXPECT_EQ(weight(1, 2, p, {}, kParams), 0.0);  // beyond D
  const PositionMatrix q = line_positions({0.0, 5.0, 20.0});
  EXPECT_NEAR(weight(0, 1, q, {}, kParams), std::exp(-0.5), 1e-15);
}

TEST(Weight, BoundedAndBitwiseSymmetric) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Scene s = random_scene(rng, 6);
    for (int u = 0; u < 6; ++u) {
      for (int v = u + 1; v < 6; ++v) {
        const double w = weight(u, v, s.p, s.obs, kParams);
        EXPECT_GE(w, 0.0);
        EXPECT_LE(w, 1.0);
        EXPECT_EQ(w, weight(v, u, s.p, s.obs, kParams));
      }
    }
  }
}

TEST(Weight, InvariantUnderRigidMotion) {
  std::mt19937_64 rng(32);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(2.2, Vec3(1, 1, 0.3).normalized()).toRotationMatrix();
  const Vec3 shift(3, -1, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const Scene s = random_scene(rng, 6);
    Scene m;
    m.p = s.p * rot.transpose();
    m.p.rowwise() += shift.transpose();
    for (const Vec3& o : s.obs.points) m.obs.points.push_back(rot * o + shift);
    for (int u = 0; u < 6; ++u) {
      for (int v = u + 1; v < 6; ++v) {
        EXPECT_NEAR(weight(u, v, s.p, s.obs, kParams), weight(u, v, m.p, m.obs, kParams), 1e-10);
      }
    }
  }
}

TEST(Weight, SingleCollisionDisconnectsAgent) {
  std::mt19937_64 rng(33);
  Scene s = random_scene(rng, 6);
  s.obs.points.clear();
  // Put agent 5 exactly l_min away from agent 0.
  s.p.row(5) = s.p.row(0) + Eigen::RowVector3d(0, 0, 1.0);
  for (int v = 1; v < 6; ++v) EXPECT_EQ(weight(0, v, s.p, s.obs, kParams), 0.0) << v;
}

TEST(WeightGradient, LocalityAndPlateau) {
  // Agents 0,1 at the desired spacing; agent 3 far away from both.
  const PositionMatrix p = line_positions({0.0, 4.0, 7.5, 30.0});
  const Eigen::MatrixX3d g = weight_gradient_matrix(0, 1, p, {}, kParams);
  EXPECT_EQ(g.row(3).norm(), 0.0);
  EXPECT_EQ(weight_gradient(0, 1, p, {}, kParams, 3), Vec3::Zero());
  // Every factor is saturated: W = 1 with zero gradient.
  EXPECT_EQ(testutil::max_abs(g), 0.0);
}

TEST(WeightGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(34);
  int nontrivial = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Scene s = random_scene(rng, 6);
    for (int u = 0; u < 6; ++u) {
      for (int v = u + 1; v < 6; ++v) {
        const Eigen::MatrixX3d g = weight_gradient_matrix(u, v, s.p, s.obs, kParams);
        for (int i = 0; i < 6; ++i) {
          EXPECT_EQ(g.row(i).transpose(), weight_gradient(u, v, s.p, s.obs, kParams, i));
          for (int a = 0; a < 3; ++a) {
            const double fd = fd_weight(u, v, s, i, a, 1e-6);
            EXPECT_NEAR(g(i, a), fd, 1e-4 * std::max(std::abs(fd), 1e-2)) << u << v << " wrt " << i << " axis " << a;
            nontrivial += std::abs(fd) > 1e-3;
          }
        }
      }
    }
  }
  EXPECT_GT(nontrivial, 100);
}

TEST(WeightGradient, FiniteDifferenceRatioTest) {
  // Central differences of a C1 function converge to the analytic value as the step shrinks.
  std::mt19937_64 rng(35);
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 10; ++trial) {
    const Scene s = random_scene(rng, 5);
    for (int v = 1; v < 5; ++v) {
      const double w = weight(0, v, s.p, s.obs, kParams);
      if (w < 1e-3 || w > 0.999) continue;
      const Vec3 g = weight_gradient(0, v, s.p, s.obs, kParams, 0);
      double prev = std::numeric_limits<double>::infinity();
      for (double h : {1e-4, 1e-5, 1e-6}) {
        const double err = std::abs(fd_weight(0, v, s, 0, 0, h) - g(0));
        EXPECT_LE(err, std::max(prev, 1e-9));
        prev = err;
      }
      EXPECT_LT(prev, 1e-7);
      ++checked;
    }
  }
  EXPECT_GE(checked, 5);
}

TEST(WeightField, AgreesWithPointwiseEvaluation) {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 5; ++trial) {
    const Scene s = random_scene(rng, 7);
    const Graph g = Graph::complete(7);
    const WeightField f(g, s.p, s.obs, kParams);
    int positive = 0;
    for (int k = 0; k < g.edge_count(); ++k) {
      const Edge& e = g.edge(k);
      EXPECT_EQ(f.weight(k), weight(e.tail, e.head, s.p, s.obs, kParams));
      EXPECT_LT(testutil::max_abs(f.gradient(k) - weight_gradient_matrix(e.tail, e.head, s.p, s.obs, kParams)), 1e-12);
      positive += f.weight(k) > 1e-12;
    }
    EXPECT_EQ(f.positive_edge_count(), positive);
    for (int i = 0; i < 7; ++i) {
      EXPECT_EQ(f.candidates(i), candidate_neighbors(i, s.p, s.obs, kParams));
      for (int j : f.positive_neighbors(i)) EXPECT_GT(f.weight(*g.edge_index(i, j)), 1e-12);
    }
    EXPECT_EQ(f.framework().weights(), f.weights());
  }
}
