#include "rigmaint/compare.hpp"

#include "rigmaint/errors.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace rigmaint {

MetricSummary summarize_metric(const std::vector<double>& t, const std::vector<double>& values, double threshold) {
  MetricSummary m;
  double sum = 0.0;
  long count = 0;
  m.max = -std::numeric_limits<double>::infinity();
  std::optional<double> settle;
  bool settled = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = values[k];
    if (std::isnan(v)) continue;
    sum += v;
    ++count;
    m.max = std::max(m.max, v);
    m.final = v;
    if (v <= threshold) {
      if (!settled) {
        settle = t[k];
        settled = true;
      }
    } else {
      settled = false;
      settle.reset();
    }
  }
  m.mean = count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  if (!count) {
    m.max = std::numeric_limits<double>::quiet_NaN();
    m.final = m.max;
  }
  m.settling_time = settle;
  return m;
}

CompareReport compare_trace(const CsvTable& trace, const CompareOptions& options) {
  const std::vector<std::string> required = {"t", "agent", "lam7_hat", "lam7_true", "pos_err", "e_lambda", "n_edges"};
  std::vector<int> col;
  std::string missing;
  for (const std::string& name : required) {
    col.push_back(trace.column(name));
    if (col.back() < 0) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) throw ParseError("trace is missing column(s): " + missing);
  if (trace.rows.empty()) throw ParseError("trace has no data rows");
  const int ct = col[0], ca = col[1], chat = col[2], ctrue = col[3], cpos = col[4], ce = col[5], cedges = col[6];

  int agents = 0;
  for (const auto& r : trace.rows) agents = std::max(agents, static_cast<int>(r[static_cast<std::size_t>(ca)]) + 1);

  CompareReport rep;
  rep.agents = agents;
  CompareSeries& s = rep.series;
  s.pos_err.assign(static_cast<std::size_t>(agents), {});
  std::size_t k = 0;
  while (k < trace.rows.size()) {
    const double t = trace.rows[k][static_cast<std::size_t>(ct)];
    std::size_t end = k;
    while (end < trace.rows.size() && trace.rows[end][static_cast<std::size_t>(ct)] == t) ++end;
    const auto& first = trace.rows[k];
    double hat_sum = 0.0;
    double pos_max = 0.0;
    for (auto& series : s.pos_err) series.push_back(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t q = k; q < end; ++q) {
      const auto& r = trace.rows[q];
      hat_sum += r[static_cast<std::size_t>(chat)];
      pos_max = std::max(pos_max, r[static_cast<std::size_t>(cpos)]);
      s.pos_err[static_cast<std::size_t>(r[static_cast<std::size_t>(ca)])].back() = r[static_cast<std::size_t>(cpos)];
    }
    const double lam = first[static_cast<std::size_t>(ctrue)];
    const double e = first[static_cast<std::size_t>(ce)];
    s.t.push_back(t);
    s.lam7_true.push_back(lam);
    s.lam7_hat_mean.push_back(hat_sum / static_cast<double>(end - k));
    s.e_lambda.push_back(e);
    s.e_lambda_rel.push_back(e / std::abs(lam));
    s.pos_err_max.push_back(pos_max);
    s.n_edges.push_back(first[static_cast<std::size_t>(cedges)]);
    k = end;
  }
  rep.ticks = static_cast<long>(s.t.size());
  rep.e_lambda = summarize_metric(s.t, s.e_lambda, std::numeric_limits<double>::infinity());
  rep.e_lambda.settling_time.reset();
  rep.e_lambda_rel = summarize_metric(s.t, s.e_lambda_rel, options.e_lambda_rel_threshold);
  rep.pos_err_max = summarize_metric(s.t, s.pos_err_max, options.position_threshold);
  rep.edges_min = *std::min_element(s.n_edges.begin(), s.n_edges.end());
  rep.edges_max = *std::max_element(s.n_edges.begin(), s.n_edges.end());
  return rep;
}

namespace {

detail::Json metric_json(const MetricSummary& m) {
  const auto num = [](double v) { return std::isfinite(v) ? detail::Json(v) : detail::Json(nullptr); };
  detail::Json j{{"mean", num(m.mean)}, {"max", num(m.max)}, {"final", num(m.final)}};
  j["settling_time"] = m.settling_time ? detail::Json(*m.settling_time) : detail::Json(nullptr);
  return j;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(p.string() + ": cannot open for writing");
  return out;
}

}  // namespace

std::string compare_to_json(const CompareReport& r, const CompareOptions& options, int indent) {
  detail::Json doc;
  doc["agents"] = r.agents;
  doc["ticks"] = r.ticks;
  doc["thresholds"] = {{"e_lambda_rel", options.e_lambda_rel_threshold}, {"position", options.position_threshold}};
  doc["e_lambda"] = metric_json(r.e_lambda);
  doc["e_lambda_rel"] = metric_json(r.e_lambda_rel);
  doc["pos_err_max"] = metric_json(r.pos_err_max);
  doc["edges"] = {{"min", r.edges_min}, {"max", r.edges_max}, {"varies", r.edges_min != r.edges_max}};
  return doc.dump(indent);
}

void write_compare_outputs(const CompareReport& r, const CompareOptions& options, const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(directory + ": cannot create directory: " + ec.message());
  const CompareSeries& s = r.series;
  {
    auto out = open_out(dir / "lambda.csv");
    out << "t,lam7_true,lam7_hat_mean\n";
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      out << format_float(s.t[k]) << ',' << format_float(s.lam7_true[k]) << ',' << format_float(s.lam7_hat_mean[k])
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "e_lambda.csv");
    out << "t,e_lambda,e_lambda_rel\n";
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      out << format_float(s.t[k]) << ',' << format_float(s.e_lambda[k]) << ',' << format_float(s.e_lambda_rel[k])
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "position_error.csv");
    out << "t";
    for (int a = 0; a < r.agents; ++a) out << ",agent" << a;
    out << ",max\n";
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      out << format_float(s.t[k]);
      for (int a = 0; a < r.agents; ++a) out << ',' << format_float(s.pos_err[static_cast<std::size_t>(a)][k]);
      out << ',' << format_float(s.pos_err_max[k]) << '\n';
    }
  }
  {
    auto out = open_out(dir / "edges.csv");
    out << "t,n_edges\n";
    for (std::size_t k = 0; k < s.t.size(); ++k) out << format_float(s.t[k]) << ',' << s.n_edges[k] << '\n';
  }
  auto out = open_out(dir / "summary.json");
  out << compare_to_json(r, options) << '\n';
}

}  // namespace rigmaint
