#include "rigmaint/scenario.hpp"

#include "json_util.hpp"

#include <cmath>

namespace rigmaint {

using detail::Json;

long Scenario::tick_count() const { return std::lround(duration / dt_ctrl); }

void validate_scenario(const Scenario& s) {
  const auto reject = [](const std::string& why) { throw ScenarioRejected(why); };
  const int n = s.agent_count();
  if (s.positions.rows() != n) reject("positions do not match the agent count");
  try {
    validate_positions(s.positions);
    validate_obstacles(s.obstacles);
    s.weights.validate();
    s.gains.validate();
    s.potential.validate();
  } catch (const Error& e) {
    reject(e.what());
  }
  if (s.special_agent < 0 || s.special_agent >= n) reject("special_agent out of range");
  if (!(s.dt_ctrl > 0.0)) reject("dt_ctrl must be positive");
  if (s.est_substeps < 1) reject("est_substeps must be at least 1");
  if (!(s.duration >= 0.0)) reject("duration must be nonnegative");
  if (!(s.warmup >= 0.0)) reject("warmup must be nonnegative");
  if (!(s.v_max > 0.0)) reject("v_max must be positive");
  if (s.noise.sigma_range < 0.0 || s.noise.sigma_bearing < 0.0) reject("noise levels must be nonnegative");
  if (s.init_position_noise < 0.0) reject("init.position_noise must be nonnegative");
  if (s.oracle_every < 1) reject("oracle_every must be at least 1");
  if (s.pass.max_spikes < 0 || s.pass.breach_tolerance < 0.0) reject("pass criteria must be nonnegative");
  for (const ExogenousSchedule& e : s.exogenous) {
    if (e.agent < 0 || e.agent >= n) reject("exogenous schedule for unknown agent " + std::to_string(e.agent));
    for (const ExogenousSegment& seg : e.segments) {
      if (!(seg.t_end >= seg.t_start)) reject("exogenous segment ends before it starts");
      if (!seg.velocity.allFinite()) reject("exogenous velocity must be finite");
    }
  }
}

namespace {

Gains parse_gains(const Json& obj, const std::string& path) {
  detail::check_keys(obj, {"k1", "k2", "k3", "K_P", "K_I", "gamma", "eta_pos"}, path);
  Gains g;
  g.k1 = detail::number_or(obj, "k1", g.k1, path);
  g.k2 = detail::number_or(obj, "k2", g.k2, path);
  g.k3 = detail::number_or(obj, "k3", g.k3, path);
  g.K_P = detail::number_or(obj, "K_P", g.K_P, path);
  g.K_I = detail::number_or(obj, "K_I", g.K_I, path);
  g.gamma = detail::number_or(obj, "gamma", g.gamma, path);
  g.eta_pos = detail::number_or(obj, "eta_pos", g.eta_pos, path);
  return g;
}

PotentialParams parse_potential(const Json& obj, const std::string& path) {
  detail::check_keys(obj, {"lambda_min", "b", "eps_clamp"}, path);
  PotentialParams p;
  p.lambda_min = detail::number_or(obj, "lambda_min", p.lambda_min, path);
  p.b = detail::number_or(obj, "b", p.b, path);
  p.eps_clamp = detail::number_or(obj, "eps_clamp", p.eps_clamp, path);
  return p;
}

std::vector<ExogenousSchedule> parse_exogenous(const Json& arr, const std::string& path) {
  if (!arr.is_array()) throw ParseError(path + ": expected an array");
  std::vector<ExogenousSchedule> out;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string ep = path + "[" + std::to_string(k) + "]";
    const Json& e = arr[k];
    detail::check_keys(e, {"agent", "segments"}, ep);
    ExogenousSchedule s;
    s.agent = detail::as_int(detail::require(e, "agent", ep), ep + ".agent");
    const Json& segs = detail::require(e, "segments", ep);
    if (!segs.is_array()) throw ParseError(ep + ".segments: expected an array");
    for (std::size_t q = 0; q < segs.size(); ++q) {
      const std::string sp = ep + ".segments[" + std::to_string(q) + "]";
      const Json& seg = segs[q];
      detail::check_keys(seg, {"t_start", "t_end", "vx", "vy", "vz"}, sp);
      ExogenousSegment out_seg;
      out_seg.t_start = detail::as_number(detail::require(seg, "t_start", sp), sp + ".t_start");
      out_seg.t_end = detail::as_number(detail::require(seg, "t_end", sp), sp + ".t_end");
      out_seg.velocity = Vec3(detail::number_or(seg, "vx", 0.0, sp), detail::number_or(seg, "vy", 0.0, sp),
                              detail::number_or(seg, "vz", 0.0, sp));
      s.segments.push_back(out_seg);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Scenario interpret(const Json& doc, const std::string& src) {
  if (!doc.is_object()) throw ParseError(src + ": expected a JSON object");
  detail::check_keys(doc,
                     {"schema_version", "name", "description", "framework", "weights", "gains", "potential",
                      "special_agent", "dt_ctrl", "dt_est", "est_substeps", "duration", "warmup", "seed",
                      "exogenous", "exogenous_cap", "v_max", "noise", "init", "modes", "pass", "oracle_every"},
                     src);
  const int version = detail::as_int(detail::require(doc, "schema_version", src), src + ".schema_version");
  if (version != 1) throw ParseError(src + ".schema_version: unsupported version " + std::to_string(version));

  Scenario s;
  FrameworkFile fw = detail::parse_framework_object(detail::require(doc, "framework", src), src + ".framework", false);
  s.graph = std::move(fw.graph);
  s.positions = std::move(fw.positions);
  s.obstacles = std::move(fw.obstacles);
  if (const auto it = doc.find("weights"); it != doc.end()) s.weights = detail::parse_weight_params(*it, src + ".weights");
  if (const auto it = doc.find("gains"); it != doc.end()) s.gains = parse_gains(*it, src + ".gains");
  if (const auto it = doc.find("potential"); it != doc.end()) s.potential = parse_potential(*it, src + ".potential");
  if (const auto it = doc.find("special_agent"); it != doc.end()) {
    s.special_agent = detail::as_int(*it, src + ".special_agent");
  }
  s.dt_ctrl = detail::number_or(doc, "dt_ctrl", s.dt_ctrl, src);
  if (const auto it = doc.find("est_substeps"); it != doc.end()) {
    s.est_substeps = detail::as_int(*it, src + ".est_substeps");
  }
  if (const auto it = doc.find("dt_est"); it != doc.end()) {
    const double dt_est = detail::as_number(*it, src + ".dt_est");
    if (!(dt_est > 0.0)) throw ParseError(src + ".dt_est: must be positive");
    const double ratio = s.dt_ctrl / dt_est;
    const long sub = std::lround(ratio);
    if (sub < 1 || std::abs(ratio - static_cast<double>(sub)) > 1e-9 * ratio) {
      throw ParseError(src + ".dt_est: dt_ctrl must be an integer multiple of dt_est");
    }
    if (doc.contains("est_substeps") && sub != s.est_substeps) {
      throw ParseError(src + ".dt_est: conflicts with est_substeps");
    }
    s.est_substeps = static_cast<int>(sub);
  }
  s.duration = detail::as_number(detail::require(doc, "duration", src), src + ".duration");
  s.warmup = detail::number_or(doc, "warmup", s.warmup, src);
  if (const auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      throw ParseError(src + ".seed: expected a nonnegative integer");
    }
    s.seed = it->get<std::uint64_t>();
  }
  if (const auto it = doc.find("exogenous"); it != doc.end()) s.exogenous = parse_exogenous(*it, src + ".exogenous");
  s.exogenous_cap = detail::number_or(doc, "exogenous_cap", s.exogenous_cap, src);
  s.v_max = detail::number_or(doc, "v_max", s.v_max, src);
  if (const auto it = doc.find("noise"); it != doc.end()) {
    detail::check_keys(*it, {"sigma_range", "sigma_bearing"}, src + ".noise");
    s.noise.sigma_range = detail::number_or(*it, "sigma_range", 0.0, src + ".noise");
    s.noise.sigma_bearing = detail::number_or(*it, "sigma_bearing", 0.0, src + ".noise");
  }
  if (const auto it = doc.find("init"); it != doc.end()) {
    detail::check_keys(*it, {"position_noise"}, src + ".init");
    s.init_position_noise = detail::number_or(*it, "position_noise", 0.0, src + ".init");
  }
  if (const auto it = doc.find("modes"); it != doc.end()) {
    const std::string mp = src + ".modes";
    detail::check_keys(*it, {"oracle_consensus", "oracle_eigenpair", "controller"}, mp);
    if (it->contains("oracle_consensus")) s.modes.oracle_consensus = detail::as_bool((*it)["oracle_consensus"], mp + ".oracle_consensus");
    if (it->contains("oracle_eigenpair")) s.modes.oracle_eigenpair = detail::as_bool((*it)["oracle_eigenpair"], mp + ".oracle_eigenpair");
    if (it->contains("controller")) s.modes.controller = detail::as_bool((*it)["controller"], mp + ".controller");
  }
  if (const auto it = doc.find("pass"); it != doc.end()) {
    const std::string pp = src + ".pass";
    detail::check_keys(*it, {"max_spikes", "breach_tolerance"}, pp);
    if (it->contains("max_spikes")) s.pass.max_spikes = detail::as_int((*it)["max_spikes"], pp + ".max_spikes");
    s.pass.breach_tolerance = detail::number_or(*it, "breach_tolerance", s.pass.breach_tolerance, pp);
  }
  if (const auto it = doc.find("oracle_every"); it != doc.end()) s.oracle_every = detail::as_int(*it, src + ".oracle_every");
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source,
                        const std::vector<std::string>& overrides) {
  Json doc = detail::parse_json_text(text, source);
  for (const std::string& o : overrides) detail::apply_override(doc, o);
  Scenario s = interpret(doc, source);
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  return parse_scenario(read_text_file(path), path, overrides);
}

std::string scenario_to_json(const Scenario& s, int indent) {
  Json fw;
  fw["n"] = s.agent_count();
  Json edges = Json::array();
  for (const Edge& e : s.graph.edges()) edges.push_back({e.tail, e.head});
  fw["edges"] = edges;
  Json pos = Json::array();
  for (Eigen::Index i = 0; i < s.positions.rows(); ++i) {
    pos.push_back({s.positions(i, 0), s.positions(i, 1), s.positions(i, 2)});
  }
  fw["positions"] = pos;
  Json obs = Json::array();
  for (const Vec3& o : s.obstacles.points) obs.push_back({o.x(), o.y(), o.z()});
  fw["obstacles"] = obs;

  Json exo = Json::array();
  for (const ExogenousSchedule& e : s.exogenous) {
    Json segs = Json::array();
    for (const ExogenousSegment& seg : e.segments) {
      segs.push_back({{"t_start", seg.t_start}, {"t_end", seg.t_end}, {"vx", seg.velocity.x()},
                      {"vy", seg.velocity.y()}, {"vz", seg.velocity.z()}});
    }
    exo.push_back({{"agent", e.agent}, {"segments", segs}});
  }

  Json doc;
  doc["schema_version"] = 1;
  doc["framework"] = fw;
  doc["weights"] = detail::weight_params_to_json(s.weights);
  doc["gains"] = {{"k1", s.gains.k1}, {"k2", s.gains.k2},   {"k3", s.gains.k3},       {"K_P", s.gains.K_P},
                  {"K_I", s.gains.K_I}, {"gamma", s.gains.gamma}, {"eta_pos", s.gains.eta_pos}};
  doc["potential"] = {{"lambda_min", s.potential.lambda_min}, {"b", s.potential.b}, {"eps_clamp", s.potential.eps_clamp}};
  doc["special_agent"] = s.special_agent;
  doc["dt_ctrl"] = s.dt_ctrl;
  doc["est_substeps"] = s.est_substeps;
  doc["duration"] = s.duration;
  doc["warmup"] = s.warmup;
  doc["seed"] = s.seed;
  doc["exogenous"] = exo;
  doc["exogenous_cap"] = s.exogenous_cap;
  doc["v_max"] = s.v_max;
  doc["noise"] = {{"sigma_range", s.noise.sigma_range}, {"sigma_bearing", s.noise.sigma_bearing}};
  doc["init"] = {{"position_noise", s.init_position_noise}};
  doc["modes"] = {{"oracle_consensus", s.modes.oracle_consensus},
                  {"oracle_eigenpair", s.modes.oracle_eigenpair},
                  {"controller", s.modes.controller}};
  doc["pass"] = {{"max_spikes", s.pass.max_spikes}, {"breach_tolerance", s.pass.breach_tolerance}};
  doc["oracle_every"] = s.oracle_every;
  return doc.dump(indent);
}

}  // namespace rigmaint
