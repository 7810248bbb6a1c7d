#pragma once

#include "rigmaint/estimators.hpp"
#include "rigmaint/rigidity.hpp"
#include "rigmaint/scenario.hpp"
#include "rigmaint/trace.hpp"
#include "rigmaint/weights.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rigmaint {

/// Double-buffered one-hop message bus. Every read is checked against the
/// receiver's declared neighbor set for the current tick.
class MessageBus : public PacketSource {
 public:
  explicit MessageBus(int n);

  void set_neighbors(std::vector<std::vector<int>> neighbors);
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(static_cast<std::size_t>(i)); }

  /// Stages a packet; it becomes readable after deliver().
  void publish(NeighborPacket packet);
  void deliver();

  const NeighborPacket& packet(int receiver, int sender) const override;

  long reads() const noexcept { return reads_; }
  long violations() const noexcept { return violations_; }

 private:
  int n_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::optional<NeighborPacket>> front_;
  std::vector<std::optional<NeighborPacket>> back_;
  mutable long reads_ = 0;
  mutable long violations_ = 0;
};

/// A recoverable problem reported during a run (stale bearings, missing
/// packets, controller not ready). Runs never abort on these.
struct SimEvent {
  long tick = 0;
  double t = 0.0;
  int agent = -1;
  std::string kind;
  std::string message;
};

/// Measurements of one control tick.
struct Measurements {
  /// ranges[i] covers every j in N_i.
  std::vector<std::vector<RangeMeasurement>> ranges;
  /// Fresh bearing payload of the special agent, absent when it has fewer
  /// than two non-collinear neighbors.
  std::optional<SpecialPayload> special;
};

/// Picks the two neighbors of `center` spanning the largest triangle with
/// it (ties to the lowest indices). Empty when the best area is below
/// `min_area`.
std::optional<std::pair<int, int>> select_anchor_pair(int center, const std::vector<int>& neighbors,
                                                      const std::vector<Vec3>& relative, double min_area = 1e-6);

struct SimSummary {
  int agents = 0;
  long ticks = 0;
  double duration = 0.0;
  double lambda_min = 0.0;
  double warmup = 0.0;
  double min_lambda7 = 0.0;                 ///< over the whole run
  double min_lambda7_after_warmup = 0.0;    ///< NaN when no post-warm-up record
  int below_threshold_runs = 0;
  int spikes = 0;                           ///< runs of exactly one tick
  long longest_below_run = 0;               ///< ticks
  double mean_e_lambda = 0.0;
  double mean_e_lambda_after_warmup = 0.0;
  double final_e_lambda = 0.0;
  std::vector<double> final_position_errors;
  double max_final_position_error = 0.0;
  std::map<int, long> edge_histogram;       ///< edge count -> ticks
  long clamp_count = 0;                     ///< agent-ticks with a clamped estimate
  long breach_ticks = 0;
  long severe_breach_ticks = 0;             ///< deeper than the tolerance
  double max_breach_depth = 0.0;
  long boundedness_trips = 0;
  long events = 0;
  long packet_reads = 0;
  long locality_violations = 0;
  bool lambda_ok = true;
  bool safety_ok = true;
  bool passed = true;
};

std::string summary_to_json(const SimSummary& s, const std::vector<SimEvent>& events, int indent = 2);

struct RunOptions {
  /// Rows are streamed here when set; otherwise kept in SimResult::trace.
  std::ostream* trace_stream = nullptr;
  bool keep_trace = true;
};

struct SimResult {
  std::vector<TraceRow> trace;
  SimSummary summary;
  std::vector<SimEvent> events;
};

/// Fixed-step closed loop: weights and neighbor sets from true geometry,
/// measurements, estimator substeps, control, Euler integration,
/// centralized diagnostics, trace.
class Simulation {
 public:
  /// Throws ScenarioRejected when the scenario is invalid or the initial
  /// framework is not rigid with lambda7 above lambda_min.
  explicit Simulation(Scenario scenario);

  long tick() const noexcept { return tick_; }
  double time() const noexcept { return static_cast<double>(tick_) * scenario_.dt_ctrl; }
  bool done() const noexcept { return tick_ >= scenario_.tick_count(); }

  /// Advances one control tick and returns its trace rows.
  std::vector<TraceRow> step();
  /// Rows of the t = 0 record.
  std::vector<TraceRow> initial_record();

  const Scenario& scenario() const noexcept { return scenario_; }
  const PositionMatrix& positions() const noexcept { return p_; }
  const std::vector<AgentEstimator>& agents() const noexcept { return agents_; }
  const MessageBus& bus() const noexcept { return bus_; }
  const std::vector<SimEvent>& events() const noexcept { return events_; }
  /// Centralized eigen-data of the current true configuration.
  const RigidityReport& oracle() const noexcept { return oracle_; }
  const WeightField& weight_field() const noexcept { return *field_; }
  long boundedness_trips() const noexcept { return bound_trips_; }

  /// Agent i's eigenvalue estimate (or the oracle value in eigenpair mode).
  double lambda_hat(int i) const;

  /// Measurements for the current configuration. Draws noise from the run's
  /// generator when noise is configured.
  Measurements measure();

 private:
  void refresh_geometry();
  void estimator_substep(const Measurements& m);
  void publish_all(const std::optional<SpecialPayload>& special);
  std::vector<TraceRow> record(const std::vector<int>& clamped);
  Eigen::VectorXd exact_consensus() const;

  Scenario scenario_;
  int n_;
  long tick_ = 0;
  PositionMatrix p_;
  std::vector<AgentEstimator> agents_;
  MessageBus bus_;
  std::mt19937_64 rng_;
  std::optional<WeightField> field_;
  RigidityReport oracle_;
  bool oracle_fresh_ = false;
  std::optional<SpecialPayload> last_special_;
  std::vector<SimEvent> events_;
  double v_bound_ = 0.0;
  long bound_trips_ = 0;
};

/// Runs a whole scenario. Throws ScenarioRejected before the first tick.
SimResult run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace rigmaint
