#pragma once

#include "rigmaint/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rigmaint {

struct MetricSummary {
  double mean = 0.0;
  double max = 0.0;
  double final = 0.0;
  /// Earliest time after which the metric stays at or below its threshold.
  std::optional<double> settling_time;
};

struct CompareOptions {
  /// Threshold on e_lambda / lambda7.
  double e_lambda_rel_threshold = 0.05;
  /// Threshold (m) on the largest per-agent position-estimate error.
  double position_threshold = 1e-2;
};

/// Per-tick series reconstructed from a trace.
struct CompareSeries {
  std::vector<double> t;
  std::vector<double> lam7_true;
  std::vector<double> lam7_hat_mean;
  std::vector<double> e_lambda;
  std::vector<double> e_lambda_rel;
  std::vector<double> pos_err_max;
  /// pos_err[agent][tick]
  std::vector<std::vector<double>> pos_err;
  std::vector<double> n_edges;
};

struct CompareReport {
  int agents = 0;
  long ticks = 0;
  MetricSummary e_lambda;
  MetricSummary e_lambda_rel;
  MetricSummary pos_err_max;
  double edges_min = 0.0;
  double edges_max = 0.0;
  CompareSeries series;
};

/// Throws ParseError when a required column is missing or the trace has no rows.
CompareReport compare_trace(const CsvTable& trace, const CompareOptions& options = {});

MetricSummary summarize_metric(const std::vector<double>& t, const std::vector<double>& values, double threshold);

std::string compare_to_json(const CompareReport& report, const CompareOptions& options, int indent = 2);

/// Writes lambda.csv, e_lambda.csv, position_error.csv, edges.csv and
/// summary.json into `directory` (created if needed).
void write_compare_outputs(const CompareReport& report, const CompareOptions& options, const std::string& directory);

}  // namespace rigmaint
