#include "rigmaint/simulation.hpp"

#include "rigmaint/controller.hpp"
#include "rigmaint/errors.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace rigmaint {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Euler slack on the eigenvector boundedness monitor.
constexpr double kBoundSlack = 1e-3;

}  // namespace

// ---------------------------------------------------------------------------
// MessageBus

MessageBus::MessageBus(int n)
    : n_(n),
      neighbors_(static_cast<std::size_t>(n)),
      front_(static_cast<std::size_t>(n)),
      back_(static_cast<std::size_t>(n)) {}

void MessageBus::set_neighbors(std::vector<std::vector<int>> neighbors) {
  if (static_cast<int>(neighbors.size()) != n_) throw InvalidArgument("bus: neighbor table size mismatch");
  for (auto& row : neighbors) std::sort(row.begin(), row.end());
  neighbors_ = std::move(neighbors);
}

void MessageBus::publish(NeighborPacket packet) {
  if (packet.sender < 0 || packet.sender >= n_) throw VertexOutOfRange("bus: packet sender out of range");
  back_[static_cast<std::size_t>(packet.sender)] = std::move(packet);
}

void MessageBus::deliver() {
  front_.swap(back_);
  for (auto& slot : back_) slot.reset();
}

const NeighborPacket& MessageBus::packet(int receiver, int sender) const {
  ++reads_;
  if (receiver < 0 || receiver >= n_ || sender < 0 || sender >= n_) {
    throw VertexOutOfRange("bus: read outside the agent range");
  }
  const auto& row = neighbors_[static_cast<std::size_t>(receiver)];
  if (!std::binary_search(row.begin(), row.end(), sender)) ++violations_;
  const auto& slot = front_[static_cast<std::size_t>(sender)];
  if (!slot) throw MissingNeighborPacket(receiver, sender);
  return *slot;
}

// ---------------------------------------------------------------------------

std::optional<std::pair<int, int>> select_anchor_pair(int center, const std::vector<int>& neighbors,
                                                      const std::vector<Vec3>& relative, double min_area) {
  (void)center;
  if (neighbors.size() != relative.size()) throw InvalidArgument("select_anchor_pair: size mismatch");
  double best = -1.0;
  std::optional<std::pair<int, int>> pick;
  for (std::size_t a = 0; a < neighbors.size(); ++a) {
    for (std::size_t b = a + 1; b < neighbors.size(); ++b) {
      const double area = 0.5 * relative[a].cross(relative[b]).norm();
      if (area > best) {
        best = area;
        pick = std::make_pair(neighbors[a], neighbors[b]);
      }
    }
  }
  if (!pick || best < min_area) return std::nullopt;
  return pick;
}

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      n_(scenario_.agent_count()),
      p_(scenario_.positions),
      bus_(scenario_.agent_count()),
      rng_(scenario_.seed) {
  validate_scenario(scenario_);

  refresh_geometry();
  if (!oracle_fresh_) oracle_ = rigidity_report(field_->framework());
  if (!(oracle_.lambda7 > scenario_.potential.lambda_min)) {
    throw ScenarioRejected("initial framework has lambda7 = " + format_float(oracle_.lambda7) +
                           ", not above lambda_min = " + format_float(scenario_.potential.lambda_min));
  }

  const int c = scenario_.special_agent;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  PositionMatrix p_hat(n_, 3);
  for (int i = 0; i < n_; ++i) {
    Vec3 rel = (p_.row(i) - p_.row(c)).transpose();
    if (scenario_.init_position_noise > 0.0) {
      for (int s = 0; s < 3; ++s) rel(s) += scenario_.init_position_noise * unit(rng_);
    }
    p_hat.row(i) = rel.transpose();
  }

  // Random start for the eigenvector estimate, projected off the rigid
  // motions of the initial estimated configuration.
  Eigen::VectorXd v(3 * n_);
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = unit(rng_);
  try {
    const Eigen::MatrixXd t = null_space_basis(p_hat, Vec3::Zero());
    v -= t * (t.transpose() * t).ldlt().solve(t.transpose() * v);
  } catch (const CollinearConfiguration&) {
    // Leave v unprojected; the deflation term removes the rigid motions.
  }
  v_bound_ = std::max(v.norm(), std::sqrt(3.0 * n_));

  agents_.reserve(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) agents_.push_back(AgentEstimator::start(p_hat.row(i).transpose(), block3(v, i)));
  if (scenario_.modes.oracle_consensus) {
    const Eigen::VectorXd avg = exact_consensus();
    for (auto& a : agents_) a.pi = PiFilterState::start(avg);
  }
}

void Simulation::refresh_geometry() {
  field_.emplace(scenario_.graph, p_, scenario_.obstacles, scenario_.weights);
  oracle_fresh_ = tick_ % scenario_.oracle_every == 0 || scenario_.modes.oracle_eigenpair;
  if (oracle_fresh_) oracle_ = rigidity_report(field_->framework());
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) nbrs[static_cast<std::size_t>(i)] = field_->positive_neighbors(i);
  bus_.set_neighbors(std::move(nbrs));
}

Eigen::VectorXd Simulation::exact_consensus() const {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(channel::kCount);
  for (const AgentEstimator& a : agents_) avg += consensus_inputs(a.p_hat, a.v_hat);
  return avg / n_;
}

double Simulation::lambda_hat(int i) const {
  if (scenario_.modes.oracle_eigenpair) return oracle_.lambda7;
  return rigidity_eigenvalue_estimate(agents_.at(static_cast<std::size_t>(i)).consensus().v2_bar, scenario_.gains);
}

Measurements Simulation::measure() {
  Measurements m;
  m.ranges.resize(static_cast<std::size_t>(n_));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n_; ++i) {
    for (int j : bus_.neighbors(i)) {
      double r = pairwise_distance(p_, i, j);
      if (scenario_.noise.sigma_range > 0.0) r += scenario_.noise.sigma_range * gauss(rng_);
      m.ranges[static_cast<std::size_t>(i)].push_back({j, r});
    }
  }
  const int c = scenario_.special_agent;
  const std::vector<int>& nc = bus_.neighbors(c);
  std::vector<Vec3> rel;
  rel.reserve(nc.size());
  for (int j : nc) {
    Vec3 d = (p_.row(j) - p_.row(c)).transpose();
    if (scenario_.noise.sigma_bearing > 0.0) {
      for (int s = 0; s < 3; ++s) d(s) += scenario_.noise.sigma_bearing * gauss(rng_);
    }
    rel.push_back(d);
  }
  if (const auto pair = select_anchor_pair(c, nc, rel)) {
    SpecialPayload sp;
    sp.iota = pair->first;
    sp.kappa = pair->second;
    const auto at = [&](int j) {
      return rel[static_cast<std::size_t>(std::lower_bound(nc.begin(), nc.end(), j) - nc.begin())];
    };
    sp.rel_iota = at(sp.iota);
    sp.rel_kappa = at(sp.kappa);
    sp.tick = tick_;
    m.special = sp;
  }
  return m;
}

void Simulation::publish_all(const std::optional<SpecialPayload>& special) {
  for (int i = 0; i < n_; ++i) {
    NeighborPacket pk = agents_[static_cast<std::size_t>(i)].packet(i);
    for (int j : bus_.neighbors(i)) {
      const auto k = scenario_.graph.edge_index(i, j);
      pk.weights.emplace_back(j, field_->weight(*k));
    }
    if (i == scenario_.special_agent) pk.special = special;
    bus_.publish(std::move(pk));
  }
  bus_.deliver();
}

void Simulation::estimator_substep(const Measurements& m) {
  const Scenario& sc = scenario_;
  const double dt = sc.dt_est();
  const PiGains pig{sc.gains.gamma, sc.gains.K_P, sc.gains.K_I};
  std::vector<AgentEstimator> next = agents_;
  Eigen::VectorXd avg;
  if (sc.modes.oracle_consensus) avg = exact_consensus();

  for (int i = 0; i < n_; ++i) {
    const AgentEstimator& a = agents_[static_cast<std::size_t>(i)];
    AgentEstimator& out = next[static_cast<std::size_t>(i)];
    const std::vector<int>& nbrs = bus_.neighbors(i);
    try {
      AnchorTerm anchor;
      try {
        anchor = resolve_anchor(i, sc.special_agent, nbrs, bus_, tick_);
      } catch (const StaleSpecialMeasurement& e) {
        if (events_.empty() || events_.back().tick != tick_ || events_.back().agent != i ||
            events_.back().kind != "stale_special") {
          events_.push_back({tick_, time(), i, "stale_special", e.what()});
        }
      }
      out.p_hat = position_estimator_step(i, a.p_hat, m.ranges[static_cast<std::size_t>(i)], bus_, anchor,
                                          sc.gains.eta_pos, dt);

      const ConsensusView c = sc.modes.oracle_consensus ? ConsensusView::from_channels(avg) : a.consensus();
      std::vector<WeightedNeighbor> wn;
      wn.reserve(nbrs.size());
      for (int j : nbrs) wn.push_back({j, field_->weight(*sc.graph.edge_index(i, j))});
      out.v_hat = power_iteration_step(i, a.v_hat, a.p_hat, c, wn, bus_, sc.gains, n_, dt);

      if (sc.modes.oracle_consensus) {
        out.pi = PiFilterState{avg, Eigen::VectorXd::Zero(channel::kCount)};
      } else {
        std::vector<Eigen::VectorXd> nz;
        std::vector<Eigen::VectorXd> nw;
        nz.reserve(nbrs.size());
        nw.reserve(nbrs.size());
        for (int j : nbrs) {
          const NeighborPacket& pk = bus_.packet(i, j);
          nz.push_back(pk.pi_z);
          nw.push_back(pk.pi_w);
        }
        out.pi = pi_consensus_step(a.pi, consensus_inputs(a.p_hat, a.v_hat), nz, nw, pig, dt);
      }
    } catch (const MissingNeighborPacket& e) {
      out = a;
      events_.push_back({tick_, time(), i, "missing_packet", e.what()});
    }
  }
  agents_ = std::move(next);
}

std::vector<TraceRow> Simulation::initial_record() { return record(std::vector<int>(static_cast<std::size_t>(n_), 0)); }

std::vector<TraceRow> Simulation::step() {
  const Scenario& sc = scenario_;
  if (done()) throw InvalidArgument("simulation already reached its duration");

  // Weights and neighbor sets for this tick come from refresh_geometry()
  // at the end of the previous tick (or construction).
  const Measurements m = measure();
  if (m.special) last_special_ = m.special;
  for (int s = 0; s < sc.est_substeps; ++s) {
    publish_all(last_special_);
    estimator_substep(m);
  }
  publish_all(last_special_);

  std::vector<int> clamped(static_cast<std::size_t>(n_), 0);
  PositionMatrix xi = PositionMatrix::Zero(n_, 3);
  const long warm_ticks = std::lround(sc.warmup / sc.dt_ctrl);
  if (tick_ >= warm_ticks) {
    std::optional<PacketTable> exact;
    if (sc.modes.oracle_eigenpair) {
      exact.emplace(n_);
      for (int i = 0; i < n_; ++i) {
        NeighborPacket pk;
        pk.sender = i;
        pk.p_hat = (p_.row(i) - p_.row(sc.special_agent)).transpose();
        pk.v_hat = block3(oracle_.eigvec7, i);
        exact->put(pk);
      }
    }
    const double t = time();
    for (int i = 0; i < n_; ++i) {
      Vec3 u = Vec3::Zero();
      if (sc.modes.controller) {
        ControlInput in;
        in.self = i;
        in.ready = true;
        std::vector<ControlNeighbor> cn;
        for (int j : bus_.neighbors(i)) {
          const int k = *sc.graph.edge_index(i, j);
          cn.push_back({j, field_->weight(k), field_->gradient(k, i)});
        }
        try {
          ControlOutput out;
          if (exact) {
            in.p_hat = exact->packet(i, i).p_hat;
            in.v_hat = exact->packet(i, i).v_hat;
            in.lambda_hat = oracle_.lambda7;
            in.v2_bar = 1.0 / (3.0 * n_);
            out = control_velocity(in, cn, *exact, sc.potential, n_);
          } else {
            const AgentEstimator& a = agents_[static_cast<std::size_t>(i)];
            in.p_hat = a.p_hat;
            in.v_hat = a.v_hat;
            in.lambda_hat = lambda_hat(i);
            in.v2_bar = a.consensus().v2_bar;
            out = control_velocity(in, cn, bus_, sc.potential, n_);
          }
          u = out.xi;
          clamped[static_cast<std::size_t>(i)] = out.clamped ? 1 : 0;
        } catch (const Error& e) {
          events_.push_back({tick_, t, i, "control", e.what()});
        }
      }
      const Vec3 exo = exogenous_velocity(sc.exogenous, i, t, sc.exogenous_cap);
      xi.row(i) = saturate(apply_exogenous(u, exo), sc.v_max).transpose();
    }
  }

  p_ += sc.dt_ctrl * xi;
  ++tick_;
  refresh_geometry();

  double vnorm2 = 0.0;
  for (const AgentEstimator& a : agents_) vnorm2 += a.v_hat.squaredNorm();
  if (std::sqrt(vnorm2) > v_bound_ + kBoundSlack) ++bound_trips_;

  return record(clamped);
}

std::vector<TraceRow> Simulation::record(const std::vector<int>& clamped) {
  const Scenario& sc = scenario_;
  const double t = time();
  const double lam7 = oracle_fresh_ ? oracle_.lambda7 : kNaN;
  const double lam8 = oracle_fresh_ ? oracle_.lambda8 : kNaN;

  // Safety monitor: agent pairs, agent-obstacle points, and lines of sight
  // of active edges.
  double closest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) closest = std::min(closest, pairwise_distance(p_, i, j));
    for (const Vec3& o : sc.obstacles.points) closest = std::min(closest, (p_.row(i).transpose() - o).norm());
  }
  const Eigen::VectorXd& w = field_->weights();
  for (int k = 0; k < sc.graph.edge_count(); ++k) {
    if (w(k) <= 1e-12) continue;
    const Edge& e = sc.graph.edge(k);
    closest = std::min(closest, segment_obstacle_distance(p_.row(e.tail).transpose(), p_.row(e.head).transpose(),
                                                          sc.obstacles));
  }
  const double breach = std::max(0.0, sc.weights.l_min - closest);

  std::vector<double> lam_hat(static_cast<std::size_t>(n_));
  double e_lambda = 0.0;
  for (int i = 0; i < n_; ++i) {
    lam_hat[static_cast<std::size_t>(i)] = lambda_hat(i);
    e_lambda += std::abs(lam7 - lam_hat[static_cast<std::size_t>(i)]);
  }
  e_lambda /= n_;

  std::vector<TraceRow> rows;
  rows.reserve(static_cast<std::size_t>(n_));
  const int edges = field_->positive_edge_count();
  for (int i = 0; i < n_; ++i) {
    const AgentEstimator& a = agents_[static_cast<std::size_t>(i)];
    TraceRow r;
    r.t = t;
    r.agent = i;
    r.p = p_.row(i).transpose();
    r.p_hat = a.p_hat;
    r.v_hat = a.v_hat;
    r.lam7_hat = lam_hat[static_cast<std::size_t>(i)];
    r.lam7_true = lam7;
    r.lam8_true = lam8;
    r.pos_err = ((p_.row(i) - p_.row(sc.special_agent)).transpose() - a.p_hat).norm();
    r.e_lambda = e_lambda;
    r.n_edges = edges;
    r.clamped = clamped[static_cast<std::size_t>(i)];
    r.breach = breach;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary

namespace {

class SummaryBuilder {
 public:
  SummaryBuilder(const Scenario& s) : scenario_(s), warm_ticks_(std::lround(s.warmup / s.dt_ctrl)) {
    summary_.agents = s.agent_count();
    summary_.duration = s.duration;
    summary_.lambda_min = s.potential.lambda_min;
    summary_.warmup = s.warmup;
    summary_.min_lambda7 = std::numeric_limits<double>::infinity();
    summary_.min_lambda7_after_warmup = std::numeric_limits<double>::infinity();
  }

  void add(const std::vector<TraceRow>& rows) {
    if (rows.empty()) return;
    const TraceRow& r0 = rows.front();
    const long record = records_++;
    if (std::isfinite(r0.lam7_true)) {
      summary_.min_lambda7 = std::min(summary_.min_lambda7, r0.lam7_true);
      if (record >= warm_ticks_) {
        summary_.min_lambda7_after_warmup = std::min(summary_.min_lambda7_after_warmup, r0.lam7_true);
        if (r0.lam7_true <= scenario_.potential.lambda_min) {
          ++run_;
        } else {
          close_run();
        }
      }
      e_sum_ += r0.e_lambda;
      ++e_count_;
      if (record >= warm_ticks_) {
        e_sum_warm_ += r0.e_lambda;
        ++e_count_warm_;
      }
      summary_.final_e_lambda = r0.e_lambda;
    }
    ++summary_.edge_histogram[r0.n_edges];
    if (r0.breach > 0.0) ++summary_.breach_ticks;
    if (r0.breach > scenario_.pass.breach_tolerance) ++summary_.severe_breach_ticks;
    summary_.max_breach_depth = std::max(summary_.max_breach_depth, r0.breach);
    summary_.final_position_errors.assign(rows.size(), 0.0);
    for (const TraceRow& r : rows) {
      summary_.clamp_count += r.clamped;
      summary_.final_position_errors[static_cast<std::size_t>(r.agent)] = r.pos_err;
    }
  }

  SimSummary finish(const Simulation& sim) {
    close_run();
    summary_.ticks = records_ > 0 ? records_ - 1 : 0;
    if (!std::isfinite(summary_.min_lambda7)) summary_.min_lambda7 = kNaN;
    if (!std::isfinite(summary_.min_lambda7_after_warmup)) summary_.min_lambda7_after_warmup = kNaN;
    summary_.mean_e_lambda = e_count_ ? e_sum_ / static_cast<double>(e_count_) : kNaN;
    summary_.mean_e_lambda_after_warmup = e_count_warm_ ? e_sum_warm_ / static_cast<double>(e_count_warm_) : kNaN;
    summary_.max_final_position_error = 0.0;
    for (double e : summary_.final_position_errors) {
      summary_.max_final_position_error = std::max(summary_.max_final_position_error, e);
    }
    summary_.boundedness_trips = sim.boundedness_trips();
    summary_.events = static_cast<long>(sim.events().size());
    summary_.packet_reads = sim.bus().reads();
    summary_.locality_violations = sim.bus().violations();
    summary_.lambda_ok = summary_.longest_below_run <= 1 && summary_.spikes <= scenario_.pass.max_spikes;
    summary_.safety_ok = summary_.severe_breach_ticks == 0;
    summary_.passed = summary_.lambda_ok && summary_.safety_ok;
    return summary_;
  }

 private:
  void close_run() {
    if (run_ == 0) return;
    ++summary_.below_threshold_runs;
    if (run_ == 1) ++summary_.spikes;
    summary_.longest_below_run = std::max(summary_.longest_below_run, run_);
    run_ = 0;
  }

  const Scenario& scenario_;
  long warm_ticks_;
  long records_ = 0;
  long run_ = 0;
  double e_sum_ = 0.0;
  long e_count_ = 0;
  double e_sum_warm_ = 0.0;
  long e_count_warm_ = 0;
  SimSummary summary_;
};

detail::Json number_or_null(double v) { return std::isfinite(v) ? detail::Json(v) : detail::Json(nullptr); }

}  // namespace

std::string summary_to_json(const SimSummary& s, const std::vector<SimEvent>& events, int indent) {
  detail::Json doc;
  doc["agents"] = s.agents;
  doc["ticks"] = s.ticks;
  doc["duration"] = s.duration;
  doc["lambda_min"] = s.lambda_min;
  doc["warmup"] = s.warmup;
  doc["min_lambda7"] = number_or_null(s.min_lambda7);
  doc["min_lambda7_after_warmup"] = number_or_null(s.min_lambda7_after_warmup);
  doc["below_threshold_runs"] = s.below_threshold_runs;
  doc["spikes"] = s.spikes;
  doc["longest_below_run"] = s.longest_below_run;
  doc["mean_e_lambda"] = number_or_null(s.mean_e_lambda);
  doc["mean_e_lambda_after_warmup"] = number_or_null(s.mean_e_lambda_after_warmup);
  doc["final_e_lambda"] = number_or_null(s.final_e_lambda);
  doc["final_position_errors"] = s.final_position_errors;
  doc["max_final_position_error"] = s.max_final_position_error;
  detail::Json hist = detail::Json::object();
  for (const auto& [edges, ticks] : s.edge_histogram) hist[std::to_string(edges)] = ticks;
  doc["edge_histogram"] = hist;
  doc["clamp_count"] = s.clamp_count;
  doc["breach_ticks"] = s.breach_ticks;
  doc["severe_breach_ticks"] = s.severe_breach_ticks;
  doc["max_breach_depth"] = s.max_breach_depth;
  doc["boundedness_trips"] = s.boundedness_trips;
  doc["events"] = s.events;
  doc["packet_reads"] = s.packet_reads;
  doc["locality_violations"] = s.locality_violations;
  doc["lambda_ok"] = s.lambda_ok;
  doc["safety_ok"] = s.safety_ok;
  doc["passed"] = s.passed;
  detail::Json ev = detail::Json::array();
  // Keep the file readable on long runs.
  const std::size_t shown = std::min<std::size_t>(events.size(), 100);
  for (std::size_t k = 0; k < shown; ++k) {
    const SimEvent& e = events[k];
    ev.push_back({{"tick", e.tick}, {"t", e.t}, {"agent", e.agent}, {"kind", e.kind}, {"message", e.message}});
  }
  doc["event_log"] = ev;
  return doc.dump(indent);
}

SimResult run(const Scenario& scenario, const RunOptions& options) {
  Simulation sim(scenario);
  SimResult result;
  SummaryBuilder builder(sim.scenario());
  if (options.trace_stream) write_trace_header(*options.trace_stream);
  const auto emit = [&](std::vector<TraceRow> rows) {
    builder.add(rows);
    if (options.trace_stream) {
      for (const TraceRow& r : rows) write_trace_row(*options.trace_stream, r);
    }
    if (options.keep_trace) result.trace.insert(result.trace.end(), rows.begin(), rows.end());
  };
  emit(sim.initial_record());
  while (!sim.done()) emit(sim.step());
  result.summary = builder.finish(sim);
  result.events = sim.events();
  return result;
}

}  // namespace rigmaint
