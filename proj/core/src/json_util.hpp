#pragma once

// Internal helpers around nlohmann::json. Not installed.

#include "rigmaint/errors.hpp"
#include "rigmaint/graph.hpp"
#include "rigmaint/framework_io.hpp"
#include "rigmaint/weights.hpp"

#include <json.hpp>

#include <string>

namespace rigmaint::detail {

using Json = nlohmann::json;

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                     ": malformed JSON: " + e.what());
  }
}

inline const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

inline double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  return v.get<double>();
}

inline int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  return v.get<int>();
}

inline bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ParseError(path + ": expected true or false");
  return v.get<bool>();
}

inline Vec3 as_vec3(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ParseError(path + ": expected [x, y, z]");
  Vec3 out;
  for (int s = 0; s < 3; ++s) out(s) = as_number(v[static_cast<std::size_t>(s)], path + "[" + std::to_string(s) + "]");
  if (!out.allFinite()) throw ParseError(path + ": non-finite coordinate");
  return out;
}

/// Reads a number if present, keeping `fallback` otherwise.
inline double number_or(const Json& obj, const char* key, double fallback, const std::string& path) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

/// Fails on keys outside `allowed`, so typos do not pass silently.
inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ParseError(path + "." + item.key() + ": unknown field");
  }
}

inline WeightParams parse_weight_params(const Json& obj, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  check_keys(obj, {"D", "l_min", "l_0", "delta_a", "delta_b", "sigma_beta"}, path);
  WeightParams w;
  w.D = number_or(obj, "D", w.D, path);
  w.l_min = number_or(obj, "l_min", w.l_min, path);
  w.l_0 = number_or(obj, "l_0", w.l_0, path);
  w.delta_a = number_or(obj, "delta_a", w.delta_a, path);
  w.delta_b = number_or(obj, "delta_b", w.delta_b, path);
  w.sigma_beta = number_or(obj, "sigma_beta", w.sigma_beta, path);
  try {
    w.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(path + ": " + e.what());
  }
  return w;
}

inline Json weight_params_to_json(const WeightParams& w) {
  return Json{{"D", w.D}, {"l_min", w.l_min}, {"l_0", w.l_0},
              {"delta_a", w.delta_a}, {"delta_b", w.delta_b}, {"sigma_beta", w.sigma_beta}};
}

/// Applies one "dotted.path=value" assignment. Values are read as JSON when
/// they parse, as strings otherwise. Missing objects along the path are created.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParseError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ParseError("override '" + assignment + "': empty path segment");
    Json* child = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ParseError("override '" + assignment + "': '" + part + "' is not an array index");
      }
      if (idx >= node->size()) throw ParseError("override '" + assignment + "': index " + part + " out of range");
      child = &(*node)[idx];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) throw ParseError("override '" + assignment + "': cannot descend into a scalar");
      child = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *child = value;
      return;
    }
    node = child;
    start = dot + 1;
  }
}

/// Framework object shared by framework files and scenario files.
FrameworkFile parse_framework_object(const Json& obj, const std::string& path, bool allow_weights);

}  // namespace rigmaint::detail
