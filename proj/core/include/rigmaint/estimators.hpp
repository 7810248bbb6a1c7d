#pragma once

#include "rigmaint/graph.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace rigmaint {

/// Estimator gains, all 1/s except eta_pos (a multiplier on the position
/// gradient flow). Power iteration converges when k1 > k2 * lambda7 and
/// k3 > k2 * lambda7.
struct Gains {
  double k1 = 30.0;
  double k2 = 1.0;
  double k3 = 30.0;
  double K_P = 10.0;
  double K_I = 10.0;
  double gamma = 20.0;
  double eta_pos = 10.0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// PI average consensus

/// Proportional-integral consensus filter state, one entry per channel.
/// Output y = z.
struct PiFilterState {
  Eigen::VectorXd z;
  Eigen::VectorXd w;

  /// z = local input, w = 0.
  static PiFilterState start(const Eigen::VectorXd& u);
};

struct PiGains {
  double gamma = 20.0;
  double K_P = 10.0;
  double K_I = 10.0;
};

/// One forward-Euler step of
///   z' = gamma (u - z) - K_P sum_j (z - z_j) + K_I sum_j (w - w_j)
///   w' = -K_I sum_j (z - z_j)
PiFilterState pi_consensus_step(const PiFilterState& self, const Eigen::VectorXd& u,
                                const std::vector<Eigen::VectorXd>& neighbor_z,
                                const std::vector<Eigen::VectorXd>& neighbor_w, const PiGains& gains,
                                double dt);

/// Consensus channels carried by every agent.
namespace channel {
constexpr int kVx = 0;   // avg(v_x), avg(v_y), avg(v_z)
constexpr int kV2x = 3;  // avg(v_x^2), avg(v_y^2), avg(v_z^2)
constexpr int kXY = 6;   // avg(p_y v_x - p_x v_y)
constexpr int kXZ = 7;   // avg(p_z v_x - p_x v_z)
constexpr int kYZ = 8;   // avg(p_y v_z - p_z v_y)
constexpr int kCount = 9;
}  // namespace channel

/// Local inputs of all channels for one agent.
Eigen::VectorXd consensus_inputs(const Vec3& p_hat, const Vec3& v_hat);

/// Decoded consensus outputs.
struct ConsensusView {
  Vec3 v_bar = Vec3::Zero();
  /// Mean of the three squared-component averages, i.e. |v|^2 / (3n).
  double v2_bar = 0.0;
  double z_xy = 0.0;
  double z_xz = 0.0;
  double z_yz = 0.0;

  static ConsensusView from_channels(const Eigen::VectorXd& z);
};

// ---------------------------------------------------------------------------
// Messages

/// Relative positions measured by the special agent (distance and bearing),
/// relayed to the two neighbors it anchors.
struct SpecialPayload {
  int iota = -1;
  int kappa = -1;
  Vec3 rel_iota = Vec3::Zero();   // p_iota - p_center
  Vec3 rel_kappa = Vec3::Zero();  // p_kappa - p_center
  long tick = -1;                 // control tick of the measurement
};

/// Everything an agent broadcasts to its one-hop neighbors. Only
/// sender-local state.
struct NeighborPacket {
  int sender = -1;
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  Eigen::VectorXd pi_z;
  Eigen::VectorXd pi_w;
  /// (neighbor, W) as evaluated by the sender.
  std::vector<std::pair<int, double>> weights;
  std::optional<SpecialPayload> special;
};

/// Read access to neighbor packets. Implementations may audit reads.
class PacketSource {
 public:
  virtual ~PacketSource() = default;
  /// Throws MissingNeighborPacket when nothing from `sender` is available.
  virtual const NeighborPacket& packet(int receiver, int sender) const = 0;
};

/// Plain packet table, mostly for tests.
class PacketTable : public PacketSource {
 public:
  explicit PacketTable(int n) : packets_(static_cast<std::size_t>(n)) {}
  void put(NeighborPacket p);
  void clear(int sender);
  const NeighborPacket& packet(int receiver, int sender) const override;

 private:
  std::vector<std::optional<NeighborPacket>> packets_;
};

// ---------------------------------------------------------------------------
// Relative-position estimator

struct RangeMeasurement {
  int neighbor = -1;
  double range = 0.0;
};

/// Extra terms tying the estimate to the common frame of the special agent.
struct AnchorTerm {
  bool is_center = false;
  /// Measured p_i - p_center when this agent is one of the two anchored neighbors.
  std::optional<Vec3> anchor;
};

/// Resolves the anchor role of `self` this tick from the special agent's
/// packet. Throws StaleSpecialMeasurement when the packet names `self` but
/// the measurement is not from `tick`.
AnchorTerm resolve_anchor(int self, int center, const std::vector<int>& neighbors, const PacketSource& bus,
                          long tick);

/// One Euler step of the least-squares gradient flow on the agent's
/// relative-position estimate.
Vec3 position_estimator_step(int self, const Vec3& p_hat, const std::vector<RangeMeasurement>& ranges,
                             const PacketSource& bus, const AnchorTerm& anchor, double eta, double dt);

/// Least-squares error sum over edges of (|p_j - p_i|^2 - l_ij^2)^2 / 4 plus
/// the anchor residuals |p_c|^2/2 + |p_a - a|^2/2. The position step is
/// gradient descent on it.
double position_error(const PositionMatrix& p_hat, const Graph& g, const Eigen::VectorXd& ranges, int center,
                      const std::vector<std::pair<int, Vec3>>& anchors);

// ---------------------------------------------------------------------------
// Power iteration

/// Agent i's components of T T^T v, assembled from the consensus outputs.
Vec3 ttT_action(const Vec3& p_hat, const ConsensusView& c, int n);

struct WeightedNeighbor {
  int id = -1;
  double weight = 0.0;
};

/// Agent i's rows of the symmetric rigidity matrix applied to v:
/// sum_j W_ij^2 (d . dv) d with d = p_i - p_j, dv = v_i - v_j.
Vec3 local_rigidity_action(int self, const Vec3& p_hat, const Vec3& v_hat,
                           const std::vector<WeightedNeighbor>& neighbors, const PacketSource& bus);

/// One Euler step of
///   v' = -k1 (T T^T v)_i - k2 (R v)_i - k3 (v2_bar - 1) v_i
Vec3 power_iteration_step(int self, const Vec3& v_hat, const Vec3& p_hat, const ConsensusView& c,
                          const std::vector<WeightedNeighbor>& neighbors, const PacketSource& bus,
                          const Gains& gains, int n, double dt);

/// (k3 / k2) (1 - v2_bar). Raw; may be negative during transients.
double rigidity_eigenvalue_estimate(double v2_bar, const Gains& gains);

// ---------------------------------------------------------------------------
// Per-agent bank

/// Full estimator state of one agent.
struct AgentEstimator {
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  PiFilterState pi;

  static AgentEstimator start(const Vec3& p_hat, const Vec3& v_hat);
  ConsensusView consensus() const { return ConsensusView::from_channels(pi.z); }
  NeighborPacket packet(int self) const;
};

}  // namespace rigmaint
