#include "rigmaint/framework_io.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace rigmaint {

namespace detail {

FrameworkFile parse_framework_object(const Json& obj, const std::string& path, bool allow_weights) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  if (allow_weights) {
    check_keys(obj, {"n", "edges", "positions", "obstacles", "weights"}, path);
  } else {
    check_keys(obj, {"n", "edges", "positions", "obstacles"}, path);
  }
  const int n = as_int(require(obj, "n", path), path + ".n");
  if (n < 3) throw ParseError(path + ".n: need at least 3 vertices, got " + std::to_string(n));

  const Json& pos = require(obj, "positions", path);
  if (!pos.is_array() || static_cast<int>(pos.size()) != n) {
    throw ParseError(path + ".positions: expected " + std::to_string(n) + " rows");
  }
  PositionMatrix p(n, 3);
  for (int i = 0; i < n; ++i) {
    p.row(i) = as_vec3(pos[static_cast<std::size_t>(i)], path + ".positions[" + std::to_string(i) + "]").transpose();
  }

  std::optional<Graph> graph;
  bool explicit_edges = false;
  if (const auto it = obj.find("edges"); it != obj.end()) {
    if (!it->is_array()) throw ParseError(path + ".edges: expected an array of [i, j] pairs");
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string ep = path + ".edges[" + std::to_string(k) + "]";
      const Json& e = (*it)[k];
      if (!e.is_array() || e.size() != 2) throw ParseError(ep + ": expected [i, j]");
      pairs.emplace_back(as_int(e[0], ep + "[0]"), as_int(e[1], ep + "[1]"));
    }
    try {
      graph.emplace(n, pairs);
    } catch (const InvalidGraph& e) {
      throw ParseError(path + ".edges: " + e.what());
    }
    explicit_edges = true;
  } else {
    graph.emplace(Graph::complete(n));
  }

  ObstacleSet obstacles;
  if (const auto it = obj.find("obstacles"); it != obj.end()) {
    if (!it->is_array()) throw ParseError(path + ".obstacles: expected an array of points");
    for (std::size_t k = 0; k < it->size(); ++k) {
      obstacles.points.push_back(as_vec3((*it)[k], path + ".obstacles[" + std::to_string(k) + "]"));
    }
  }

  std::optional<WeightParams> weights;
  if (allow_weights) {
    if (const auto it = obj.find("weights"); it != obj.end()) weights = parse_weight_params(*it, path + ".weights");
  }
  return FrameworkFile{std::move(*graph), std::move(p), std::move(obstacles), weights, explicit_edges};
}

}  // namespace detail

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FrameworkFile parse_framework(const std::string& text, const std::string& source,
                              const std::vector<std::string>& overrides) {
  detail::Json doc = detail::parse_json_text(text, source);
  for (const std::string& o : overrides) detail::apply_override(doc, o);
  return detail::parse_framework_object(doc, source, true);
}

FrameworkFile load_framework(const std::string& path, const std::vector<std::string>& overrides) {
  return parse_framework(read_text_file(path), path, overrides);
}

WeightedFramework to_weighted_framework(const FrameworkFile& file) {
  if (!file.weights) return WeightedFramework(file.graph, file.positions);
  const WeightField field(file.graph, file.positions, file.obstacles, *file.weights);
  return field.framework();
}

std::string report_to_json(const RigidityReport& report, int indent) {
  detail::Json doc;
  doc["rank"] = report.rank;
  doc["eigenvalues"] = std::vector<double>(report.eigenvalues.data(),
                                           report.eigenvalues.data() + report.eigenvalues.size());
  doc["lambda7"] = report.lambda7;
  doc["lambda8"] = report.lambda8;
  doc["gap"] = report.gap;
  doc["is_rigid"] = report.is_rigid;
  doc["rank_rigid"] = report.rank_rigid;
  detail::Json null_space = detail::Json::array();
  for (Eigen::Index c = 0; c < report.null_space.cols(); ++c) {
    const Eigen::VectorXd col = report.null_space.col(c);
    null_space.push_back(std::vector<double>(col.data(), col.data() + col.size()));
  }
  doc["null_space"] = null_space;
  return doc.dump(indent);
}

}  // namespace rigmaint
