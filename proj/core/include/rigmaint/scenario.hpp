#pragma once

#include "rigmaint/controller.hpp"
#include "rigmaint/estimators.hpp"
#include "rigmaint/framework_io.hpp"
#include "rigmaint/graph.hpp"
#include "rigmaint/weights.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rigmaint {

struct NoiseParams {
  double sigma_range = 0.0;    ///< m, Gaussian on every range
  double sigma_bearing = 0.0;  ///< m, Gaussian per axis on the special agent's relative positions
};

struct ModeFlags {
  /// Replace consensus outputs by exact network averages.
  bool oracle_consensus = false;
  /// Replace eigenvector/eigenvalue estimates by the centralized eigenpair.
  bool oracle_eigenpair = false;
  /// Closed loop; when false agents only follow their exogenous schedules.
  bool controller = true;
};

struct PassCriteria {
  /// Isolated single-tick excursions below lambda_min tolerated after warm-up.
  int max_spikes = 5;
  /// Safety breaches deeper than this (m) fail the run.
  double breach_tolerance = 0.05;
};

/// Everything needed for one simulation run.
struct Scenario {
  Graph graph = Graph::complete(3);
  PositionMatrix positions;
  ObstacleSet obstacles;
  WeightParams weights;
  Gains gains;
  PotentialParams potential;
  int special_agent = 0;
  double dt_ctrl = 0.01;
  int est_substeps = 10;
  double duration = 10.0;
  double warmup = 2.0;
  std::uint64_t seed = 1;
  std::vector<ExogenousSchedule> exogenous;
  /// Norm cap on steering velocities (m/s); <= 0 disables it.
  double exogenous_cap = 0.5;
  double v_max = 1.0;
  NoiseParams noise;
  /// Half-width (m) of the uniform error added to the initial position estimates.
  double init_position_noise = 0.0;
  ModeFlags modes;
  PassCriteria pass;
  /// Centralized diagnostics every k-th tick.
  int oracle_every = 1;

  int agent_count() const { return graph.vertex_count(); }
  double dt_est() const { return dt_ctrl / est_substeps; }
  long tick_count() const;
};

/// Checks parameter ranges (not the initial rigidity gate, which the
/// simulation applies). Throws ScenarioRejected.
void validate_scenario(const Scenario& s);

/// Parses a schema_version 1 scenario. `overrides` are "dotted.path=value"
/// assignments applied to the JSON document before interpretation; values
/// are read as JSON when they parse, as strings otherwise.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>",
                        const std::vector<std::string>& overrides = {});
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

/// Round-trippable JSON form.
std::string scenario_to_json(const Scenario& s, int indent = 2);

}  // namespace rigmaint
