// rigmaint: rigidity checks, closed-loop simulation and trace comparison.
//
// Exit codes
//   check    0 rigid, 2 not rigid, 1 error
//   sim      0 pass, 3 lambda7 / safety pass criteria failed, 1 error or rejected scenario
//   compare  0 ok, 1 error (missing columns, empty trace)

#include "rigmaint/compare.hpp"
#include "rigmaint/errors.hpp"
#include "rigmaint/framework_io.hpp"
#include "rigmaint/rigidity.hpp"
#include "rigmaint/scenario.hpp"
#include "rigmaint/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Common {
  std::string input;
  std::string output;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, const std::string& output_help) {
  cmd->add_option("-i,--input", c.input, "Input file")->required();
  cmd->add_option("-o,--output", c.output, output_help);
  cmd->add_option("--set", c.overrides, "Override key=value (dotted path, repeatable)")->allow_extra_args(false);
  cmd->add_flag("--quiet", c.quiet, "Only report errors");
}

int cmd_check(const Common& c) {
  const rigmaint::FrameworkFile file = rigmaint::load_framework(c.input, c.overrides);
  const rigmaint::RigidityReport report = rigmaint::rigidity_report(rigmaint::to_weighted_framework(file));
  const std::string json = rigmaint::report_to_json(report);
  if (!c.output.empty()) {
    std::ofstream out(c.output);
    if (!out) throw rigmaint::Error(c.output + ": cannot open for writing");
    out << json << '\n';
  }
  if (!c.quiet) {
    if (c.output.empty()) {
      std::cout << json << '\n';
    } else {
      std::cout << (report.is_rigid ? "rigid" : "not rigid") << ": rank " << report.rank << ", lambda7 "
                << rigmaint::format_float(report.lambda7) << '\n';
    }
  }
  return report.is_rigid ? 0 : 2;
}

int cmd_sim(const Common& c) {
  const rigmaint::Scenario scenario = rigmaint::load_scenario(c.input, c.overrides);
  const std::string trace_path = c.output.empty() ? "trace.csv" : c.output;
  std::ofstream trace(trace_path, std::ios::binary);
  if (!trace) throw rigmaint::Error(trace_path + ": cannot open for writing");
  rigmaint::RunOptions opts;
  opts.trace_stream = &trace;
  opts.keep_trace = false;
  const rigmaint::SimResult result = rigmaint::run(scenario, opts);
  trace.close();

  const std::string summary_path = trace_path + ".summary.json";
  std::ofstream summary(summary_path);
  if (!summary) throw rigmaint::Error(summary_path + ": cannot open for writing");
  summary << rigmaint::summary_to_json(result.summary, result.events) << '\n';

  const rigmaint::SimSummary& s = result.summary;
  if (!c.quiet) {
    std::cout << "ticks " << s.ticks << ", min lambda7 after warm-up "
              << rigmaint::format_float(s.min_lambda7_after_warmup) << " (threshold "
              << rigmaint::format_float(s.lambda_min) << "), spikes " << s.spikes << ", longest run "
              << s.longest_below_run << ", max breach " << rigmaint::format_float(s.max_breach_depth) << " m\n"
              << "trace " << trace_path << ", summary " << summary_path << '\n'
              << (s.passed ? "PASS" : "FAIL") << '\n';
  }
  return s.passed ? 0 : 3;
}

int cmd_compare(const Common& c) {
  rigmaint::CompareOptions opts;
  for (const std::string& o : c.overrides) {
    const auto eq = o.find('=');
    const std::string key = o.substr(0, eq);
    if (eq == std::string::npos) throw rigmaint::ParseError("override '" + o + "': expected key=value");
    const double value = std::stod(o.substr(eq + 1));
    if (key == "e_lambda_rel_threshold") {
      opts.e_lambda_rel_threshold = value;
    } else if (key == "position_threshold") {
      opts.position_threshold = value;
    } else {
      throw rigmaint::ParseError("override '" + o + "': unknown key (e_lambda_rel_threshold, position_threshold)");
    }
  }
  const rigmaint::CsvTable table = rigmaint::read_csv(c.input);
  const rigmaint::CompareReport report = rigmaint::compare_trace(table, opts);
  if (!c.output.empty()) rigmaint::write_compare_outputs(report, opts, c.output);
  if (!c.quiet) std::cout << rigmaint::compare_to_json(report, opts) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized rigidity maintenance: checks, simulation, comparison"};
  app.require_subcommand(1);

  Common check_opts;
  Common sim_opts;
  Common compare_opts;
  auto* check = app.add_subcommand("check", "Rigidity report of a framework file");
  add_common(check, check_opts, "Write the JSON report here instead of stdout");
  auto* sim = app.add_subcommand("sim", "Run a scenario and write a trace CSV plus <output>.summary.json");
  add_common(sim, sim_opts, "Trace CSV path (default trace.csv)");
  auto* compare = app.add_subcommand("compare", "Estimation-vs-oracle metrics of a trace");
  add_common(compare, compare_opts, "Directory for per-metric CSV series and summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(check_opts);
    if (sim->parsed()) return cmd_sim(sim_opts);
    if (compare->parsed()) return cmd_compare(compare_opts);
  } catch (const rigmaint::ScenarioRejected& e) {
    std::cerr << "rigmaint: scenario rejected: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "rigmaint: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
