#include "rigmaint/controller.hpp"

#include "rigmaint/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rigmaint {

void PotentialParams::validate() const {
  if (!(lambda_min > 0.0)) throw InvalidArgument("potential: lambda_min must be positive");
  if (!(b > 0.0)) throw InvalidArgument("potential: b must be positive");
  if (!(eps_clamp > 0.0)) throw InvalidArgument("potential: eps_clamp must be positive");
}

ClampedEstimate clamp_estimate(double lambda7, const PotentialParams& params) {
  const double floor = params.lambda_min + params.eps_clamp;
  // NaN estimates are clamped too, so the command stays finite.
  if (!(lambda7 >= floor)) return {floor, true};
  return {lambda7, false};
}

double potential(double lambda7, const PotentialParams& params) {
  const double x = params.b * (clamp_estimate(lambda7, params).value - params.lambda_min);
  // coth(x) - 1 = 2 / (exp(2x) - 1), accurate for large x.
  return 2.0 / std::expm1(2.0 * x);
}

double potential_derivative(double lambda7, const PotentialParams& params) {
  const double x = params.b * (clamp_estimate(lambda7, params).value - params.lambda_min);
  if (x > 350.0) return 0.0;
  const double s = std::sinh(x);
  return -params.b / (s * s);
}

Vec3 local_lambda7_gradient(const ControlInput& in, const std::vector<ControlNeighbor>& neighbors,
                            const PacketSource& bus, int n) {
  Vec3 g = Vec3::Zero();
  for (const ControlNeighbor& nb : neighbors) {
    const NeighborPacket& pk = bus.packet(in.self, nb.id);
    const Vec3 d = in.p_hat - pk.p_hat;
    const Vec3 dv = in.v_hat - pk.v_hat;
    const double c = d.dot(dv);
    g += nb.weight * nb.weight * 2.0 * c * dv;
    g += 2.0 * nb.weight * c * c * nb.weight_gradient;
  }
  const double scale = std::max(3.0 * n * in.v2_bar, 1e-6);
  return g / scale;
}

ControlOutput control_velocity(const ControlInput& in, const std::vector<ControlNeighbor>& neighbors,
                               const PacketSource& bus, const PotentialParams& params, int n) {
  if (!in.ready) throw EstimatorNotReady("agent " + std::to_string(in.self) + ": estimator still settling");
  const ClampedEstimate lam = clamp_estimate(in.lambda_hat, params);
  ControlOutput out;
  out.clamped = lam.clamped;
  out.lambda_used = lam.value;
  const double dv = potential_derivative(lam.value, params);
  if (dv == 0.0) return out;
  out.xi = -dv * local_lambda7_gradient(in, neighbors, bus, n);
  return out;
}

Vec3 exogenous_velocity(const std::vector<ExogenousSchedule>& schedules, int agent, double t, double cap) {
  Vec3 v = Vec3::Zero();
  for (const ExogenousSchedule& s : schedules) {
    if (s.agent != agent) continue;
    for (const ExogenousSegment& seg : s.segments) {
      if (t >= seg.t_start && t < seg.t_end) {
        v += seg.velocity;
        break;
      }
    }
  }
  return cap > 0.0 ? saturate(v, cap) : v;
}

Vec3 apply_exogenous(const Vec3& xi, const Vec3& exogenous) { return xi + exogenous; }

Vec3 saturate(const Vec3& v, double v_max) {
  const double norm = v.norm();
  if (norm <= v_max || norm == 0.0) return v;
  return v * (v_max / norm);
}

}  // namespace rigmaint
