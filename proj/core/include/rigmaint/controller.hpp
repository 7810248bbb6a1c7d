#pragma once

#include "rigmaint/estimators.hpp"
#include "rigmaint/graph.hpp"

#include <vector>

namespace rigmaint {

struct PotentialParams {
  double lambda_min = 7.5;
  double b = 1.0;
  /// Estimates are clamped to lambda_min + eps_clamp before evaluation.
  double eps_clamp = 1e-3;

  void validate() const;
};

/// coth(b (lambda - lambda_min)) - 1, evaluated after clamping.
double potential(double lambda7, const PotentialParams& params);
/// dV/dlambda = -b / sinh^2(b (lambda - lambda_min)), evaluated after clamping.
double potential_derivative(double lambda7, const PotentialParams& params);

struct ClampedEstimate {
  double value = 0.0;
  bool clamped = false;
};
ClampedEstimate clamp_estimate(double lambda7, const PotentialParams& params);

/// One neighbor as seen by the controller of agent i.
struct ControlNeighbor {
  int id = -1;
  double weight = 0.0;
  /// dW_ij / dp_i.
  Vec3 weight_gradient = Vec3::Zero();
};

/// Agent-local inputs of the control law.
struct ControlInput {
  int self = -1;
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  double lambda_hat = 0.0;
  /// Consensus estimate of |v|^2 / (3n); normalizes the eigenvector scale.
  double v2_bar = 1.0;
  bool ready = false;
};

struct ControlOutput {
  Vec3 xi = Vec3::Zero();
  bool clamped = false;
  /// Clamped lambda fed to the potential.
  double lambda_used = 0.0;
};

/// Local estimate of dlambda7/dp_i for a unit eigenvector:
///   sum_j [W^2 2 (d.dv) dv + 2 W (dW/dp_i) (d.dv)^2] / (3n v2_bar)
/// with d, dv differences of estimated positions and eigenvector components.
Vec3 local_lambda7_gradient(const ControlInput& in, const std::vector<ControlNeighbor>& neighbors,
                            const PacketSource& bus, int n);

/// xi_i = -V'(lambda_hat) * local_lambda7_gradient. Throws EstimatorNotReady
/// when in.ready is false.
ControlOutput control_velocity(const ControlInput& in, const std::vector<ControlNeighbor>& neighbors,
                               const PacketSource& bus, const PotentialParams& params, int n);

// ---------------------------------------------------------------------------
// Exogenous steering

/// Constant velocity on [t_start, t_end).
struct ExogenousSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  Vec3 velocity = Vec3::Zero();
};

struct ExogenousSchedule {
  int agent = -1;
  std::vector<ExogenousSegment> segments;
};

/// Scheduled steering velocity of `agent` at time t, norm-capped at `cap`
/// (cap <= 0 disables the cap). Zero when no segment covers t.
Vec3 exogenous_velocity(const std::vector<ExogenousSchedule>& schedules, int agent, double t, double cap);

Vec3 apply_exogenous(const Vec3& xi, const Vec3& exogenous);

/// Scales v down to norm v_max, keeping its direction.
Vec3 saturate(const Vec3& v, double v_max);

}  // namespace rigmaint
