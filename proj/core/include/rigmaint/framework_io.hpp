#pragma once

#include "rigmaint/graph.hpp"
#include "rigmaint/rigidity.hpp"
#include "rigmaint/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rigmaint {

/// Contents of a framework file:
///
///   { "n": 4,
///     "edges": [[0, 1], [0, 2]],      optional, absent means the complete graph
///     "positions": [[x, y, z], ...],  n rows, meters
///     "obstacles": [[x, y, z], ...],  optional
///     "weights": { "D": 6, ... } }    optional; state-dependent weights
///
/// Vertex indices are 0-based.
struct FrameworkFile {
  Graph graph;
  PositionMatrix positions;
  ObstacleSet obstacles;
  std::optional<WeightParams> weights;
  bool explicit_edges = false;
};

/// `overrides` are "dotted.path=value" assignments applied before interpretation.
FrameworkFile parse_framework(const std::string& text, const std::string& source = "<input>",
                              const std::vector<std::string>& overrides = {});
FrameworkFile load_framework(const std::string& path, const std::vector<std::string>& overrides = {});

/// Unit weights, or the state-dependent weights when the file carries parameters.
WeightedFramework to_weighted_framework(const FrameworkFile& file);

/// JSON document with rank, eigenvalues, lambda7, lambda8, gap, is_rigid,
/// rank_rigid and the six null-space columns.
std::string report_to_json(const RigidityReport& report, int indent = 2);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace rigmaint
