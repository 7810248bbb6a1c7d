#include "rigmaint/estimators.hpp"

#include "rigmaint/errors.hpp"

#include <string>

namespace rigmaint {

void Gains::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw InvalidArgument(std::string("gain ") + name + " must be positive");
  };
  positive(k1, "k1");
  positive(k2, "k2");
  positive(k3, "k3");
  positive(K_P, "K_P");
  positive(K_I, "K_I");
  positive(gamma, "gamma");
  positive(eta_pos, "eta_pos");
}

PiFilterState PiFilterState::start(const Eigen::VectorXd& u) {
  return PiFilterState{u, Eigen::VectorXd::Zero(u.size())};
}

PiFilterState pi_consensus_step(const PiFilterState& self, const Eigen::VectorXd& u,
                                const std::vector<Eigen::VectorXd>& neighbor_z,
                                const std::vector<Eigen::VectorXd>& neighbor_w, const PiGains& gains,
                                double dt) {
  if (neighbor_z.size() != neighbor_w.size()) {
    throw InvalidArgument("pi_consensus_step: neighbor z and w lists differ in length");
  }
  const Eigen::Index dim = self.z.size();
  if (u.size() != dim || self.w.size() != dim) throw InvalidArgument("pi_consensus_step: channel mismatch");
  Eigen::VectorXd dz_sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd dw_sum = Eigen::VectorXd::Zero(dim);
  for (std::size_t k = 0; k < neighbor_z.size(); ++k) {
    dz_sum += self.z - neighbor_z[k];
    dw_sum += self.w - neighbor_w[k];
  }
  PiFilterState next;
  next.z = self.z + dt * (gains.gamma * (u - self.z) - gains.K_P * dz_sum + gains.K_I * dw_sum);
  next.w = self.w - dt * gains.K_I * dz_sum;
  return next;
}

Eigen::VectorXd consensus_inputs(const Vec3& p, const Vec3& v) {
  Eigen::VectorXd u(channel::kCount);
  u.segment<3>(channel::kVx) = v;
  u.segment<3>(channel::kV2x) = v.cwiseProduct(v);
  u(channel::kXY) = p.y() * v.x() - p.x() * v.y();
  u(channel::kXZ) = p.z() * v.x() - p.x() * v.z();
  u(channel::kYZ) = p.y() * v.z() - p.z() * v.y();
  return u;
}

ConsensusView ConsensusView::from_channels(const Eigen::VectorXd& z) {
  if (z.size() != channel::kCount) throw InvalidArgument("consensus state has the wrong channel count");
  ConsensusView c;
  c.v_bar = z.segment<3>(channel::kVx);
  c.v2_bar = z.segment<3>(channel::kV2x).mean();
  c.z_xy = z(channel::kXY);
  c.z_xz = z(channel::kXZ);
  c.z_yz = z(channel::kYZ);
  return c;
}

void PacketTable::put(NeighborPacket p) {
  const auto idx = static_cast<std::size_t>(p.sender);
  if (p.sender < 0 || idx >= packets_.size()) throw VertexOutOfRange("packet sender out of range");
  packets_[idx] = std::move(p);
}

void PacketTable::clear(int sender) { packets_.at(static_cast<std::size_t>(sender)).reset(); }

const NeighborPacket& PacketTable::packet(int receiver, int sender) const {
  if (sender < 0 || static_cast<std::size_t>(sender) >= packets_.size() ||
      !packets_[static_cast<std::size_t>(sender)]) {
    throw MissingNeighborPacket(receiver, sender);
  }
  return *packets_[static_cast<std::size_t>(sender)];
}

AnchorTerm resolve_anchor(int self, int center, const std::vector<int>& neighbors, const PacketSource& bus,
                          long tick) {
  AnchorTerm term;
  if (self == center) {
    term.is_center = true;
    return term;
  }
  bool adjacent = false;
  for (int j : neighbors) adjacent = adjacent || j == center;
  if (!adjacent) return term;
  const NeighborPacket& pc = bus.packet(self, center);
  if (!pc.special) return term;
  const SpecialPayload& s = *pc.special;
  if (s.iota != self && s.kappa != self) return term;
  if (s.tick != tick) {
    throw StaleSpecialMeasurement("agent " + std::to_string(self) + ": bearing payload from tick " +
                                  std::to_string(s.tick) + " used at tick " + std::to_string(tick));
  }
  term.anchor = s.iota == self ? s.rel_iota : s.rel_kappa;
  return term;
}

Vec3 position_estimator_step(int self, const Vec3& p_hat, const std::vector<RangeMeasurement>& ranges,
                             const PacketSource& bus, const AnchorTerm& anchor, double eta, double dt) {
  Vec3 flow = Vec3::Zero();
  for (const RangeMeasurement& m : ranges) {
    const Vec3 diff = bus.packet(self, m.neighbor).p_hat - p_hat;
    flow += (diff.squaredNorm() - m.range * m.range) * diff;
  }
  if (anchor.is_center) flow -= p_hat;
  if (anchor.anchor) flow -= p_hat - *anchor.anchor;
  return p_hat + dt * eta * flow;
}

double position_error(const PositionMatrix& p_hat, const Graph& g, const Eigen::VectorXd& ranges, int center,
                      const std::vector<std::pair<int, Vec3>>& anchors) {
  double e = 0.0;
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& ed = g.edge(k);
    const double r = (p_hat.row(ed.head) - p_hat.row(ed.tail)).squaredNorm() - ranges(k) * ranges(k);
    e += 0.25 * r * r;
  }
  e += 0.5 * p_hat.row(center).squaredNorm();
  for (const auto& [i, a] : anchors) e += 0.5 * (p_hat.row(i).transpose() - a).squaredNorm();
  return e;
}

Vec3 ttT_action(const Vec3& p, const ConsensusView& c, int n) {
  const double nn = static_cast<double>(n);
  return nn * Vec3(c.v_bar.x() + c.z_xy * p.y() + c.z_xz * p.z(),
                   c.v_bar.y() - c.z_xy * p.x() - c.z_yz * p.z(),
                   c.v_bar.z() - c.z_xz * p.x() + c.z_yz * p.y());
}

Vec3 local_rigidity_action(int self, const Vec3& p_hat, const Vec3& v_hat,
                           const std::vector<WeightedNeighbor>& neighbors, const PacketSource& bus) {
  Vec3 out = Vec3::Zero();
  for (const WeightedNeighbor& nb : neighbors) {
    const NeighborPacket& pk = bus.packet(self, nb.id);
    const Vec3 d = p_hat - pk.p_hat;
    const Vec3 dv = v_hat - pk.v_hat;
    out += nb.weight * nb.weight * d.dot(dv) * d;
  }
  return out;
}

Vec3 power_iteration_step(int self, const Vec3& v_hat, const Vec3& p_hat, const ConsensusView& c,
                          const std::vector<WeightedNeighbor>& neighbors, const PacketSource& bus,
                          const Gains& gains, int n, double dt) {
  const Vec3 deflate = ttT_action(p_hat, c, n);
  const Vec3 rv = local_rigidity_action(self, p_hat, v_hat, neighbors, bus);
  return v_hat + dt * (-gains.k1 * deflate - gains.k2 * rv - gains.k3 * (c.v2_bar - 1.0) * v_hat);
}

double rigidity_eigenvalue_estimate(double v2_bar, const Gains& gains) {
  return gains.k3 / gains.k2 * (1.0 - v2_bar);
}

AgentEstimator AgentEstimator::start(const Vec3& p_hat, const Vec3& v_hat) {
  AgentEstimator a;
  a.p_hat = p_hat;
  a.v_hat = v_hat;
  a.pi = PiFilterState::start(consensus_inputs(p_hat, v_hat));
  return a;
}

NeighborPacket AgentEstimator::packet(int self) const {
  NeighborPacket p;
  p.sender = self;
  p.p_hat = p_hat;
  p.v_hat = v_hat;
  p.pi_z = pi.z;
  p.pi_w = pi.w;
  return p;
}

}  // namespace rigmaint
