#include "rigmaint/trace.hpp"

#include "rigmaint/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace rigmaint {

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "t",        "agent",     "px",        "py",      "pz",       "phx",     "phy",
      "phz",      "vhx",       "vhy",       "vhz",     "lam7_hat", "lam7_true", "lam8_true",
      "pos_err",  "e_lambda",  "n_edges",   "clamped", "breach"};
  return cols;
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_trace_header(std::ostream& out) {
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_trace_row(std::ostream& out, const TraceRow& r) {
  out << format_float(r.t) << ',' << r.agent;
  for (const Vec3* v : {&r.p, &r.p_hat, &r.v_hat}) {
    for (int s = 0; s < 3; ++s) out << ',' << format_float((*v)(s));
  }
  out << ',' << format_float(r.lam7_hat) << ',' << format_float(r.lam7_true) << ',' << format_float(r.lam8_true)
      << ',' << format_float(r.pos_err) << ',' << format_float(r.e_lambda) << ',' << r.n_edges << ','
      << r.clamped << ',' << format_float(r.breach) << '\n';
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  write_trace_header(out);
  for (const TraceRow& r : rows) write_trace_row(out, r);
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  write_trace_csv(out, rows);
  if (!out) throw Error(path + ": write failed");
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    const std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                       " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cells[c], &used));
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": column '" + table.header[c] +
                         "' is not a number: '" + cells[c] + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  return read_csv(in, path);
}

}  // namespace rigmaint
