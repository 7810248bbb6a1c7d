#pragma once

#include "rigmaint/graph.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rigmaint {

/// One (tick, agent) row of a simulation trace.
struct TraceRow {
  double t = 0.0;
  int agent = 0;
  Vec3 p = Vec3::Zero();
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  double lam7_hat = 0.0;
  double lam7_true = 0.0;
  double lam8_true = 0.0;
  /// |p_i - p_center - p_hat_i|
  double pos_err = 0.0;
  /// Mean over agents of |lambda7 - lambda7_hat_i| at this tick.
  double e_lambda = 0.0;
  int n_edges = 0;
  int clamped = 0;
  /// Deepest safety-distance violation at this tick (m), 0 when clear.
  double breach = 0.0;
};

/// Column names, in file order.
const std::vector<std::string>& trace_columns();

/// printf("%.9g"); "nan"/"inf" for non-finite values.
std::string format_float(double v);

void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const TraceRow& row);
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

/// Numeric CSV with a header row. Throws ParseError on ragged rows or
/// non-numeric cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index, -1 when absent.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source = "<csv>");
CsvTable read_csv(const std::string& path);

}  // namespace rigmaint
