// Command-line front end: run one experiment, run the network-size or
// topology sweeps, run the numerical verification suite, or re-plot and
// summarize previously written trace CSVs.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netsysid/harness.hpp"
#include "netsysid/svg.hpp"

namespace {

netsysid::ExperimentConfig load_config(const std::string& arg) {
  if (arg == "desk" || arg == "full") return netsysid::preset(arg);
  if (!std::filesystem::exists(arg))
    throw netsysid::ConfigError("no such preset or config file: " + arg);
  return netsysid::parse_config_file(arg);
}

std::vector<netsysid::ErrorTrace> load_traces(const std::vector<std::string>& paths) {
  std::vector<netsysid::ErrorTrace> traces;
  traces.reserve(paths.size());
  for (const std::string& path : paths) traces.push_back(netsysid::load_trace(path));
  return traces;
}

void print_summary(std::span<const netsysid::ErrorTrace> traces) {
  std::cout << netsysid::summary_text(netsysid::summarize(traces));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed streaming identification of linear systems"};
  app.require_subcommand(1);
  int workers = 1;
  app.add_option("--workers", workers,
                 "parallel trace workers (0: one per hardware thread)");

  std::string config_arg;
  std::vector<int> sizes = {1, 5, 20};
  bool quick = false;
  std::vector<std::string> trace_paths;
  std::string plot_out = "plot.svg";

  CLI::App* cmd_run = app.add_subcommand("run", "run one experiment from a config file");
  cmd_run->add_option("config", config_arg, "config file, or preset desk|full")->required();

  CLI::App* cmd_size = app.add_subcommand("sweep-size", "error vs network size");
  cmd_size->add_option("config", config_arg, "config file, or preset desk|full")->required();
  cmd_size->add_option("--sizes", sizes, "network sizes to sweep");

  CLI::App* cmd_topo = app.add_subcommand("sweep-topology", "error vs network topology");
  cmd_topo->add_option("config", config_arg, "config file, or preset desk|full")->required();

  CLI::App* cmd_verify = app.add_subcommand("verify", "numerical property checks");
  cmd_verify->add_flag("--quick", quick, "smaller replica counts");

  CLI::App* cmd_plot = app.add_subcommand("plot", "render trace CSVs as an SVG");
  cmd_plot->add_option("traces", trace_paths, "trace CSV files")->required();
  cmd_plot->add_option("-o,--out", plot_out, "output SVG path");

  CLI::App* cmd_sum = app.add_subcommand("summarize", "tabulate final errors per group");
  cmd_sum->add_option("traces", trace_paths, "trace CSV files")->required();

  for (CLI::App* sub : {cmd_run, cmd_size, cmd_topo, cmd_verify, cmd_plot, cmd_sum})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_run->parsed()) {
      netsysid::ExperimentConfig config = load_config(config_arg);
      netsysid::apply_output_override(config);
      auto traces = netsysid::run_experiment(config, workers);
      print_summary(traces);
      std::cout << "wrote " << config.out_dir << "\n";
    } else if (cmd_size->parsed()) {
      netsysid::ExperimentConfig config = load_config(config_arg);
      netsysid::apply_output_override(config);
      auto result = netsysid::run_size_sweep(config, sizes, workers);
      print_summary(result.traces);
      std::cout << "wrote " << result.out_dir << "\n";
    } else if (cmd_topo->parsed()) {
      netsysid::ExperimentConfig config = load_config(config_arg);
      netsysid::apply_output_override(config);
      auto result = netsysid::run_topology_sweep(config, workers);
      print_summary(result.traces);
      std::cout << "wrote " << result.out_dir << "\n";
    } else if (cmd_verify->parsed()) {
      int failures = netsysid::run_verify(quick, std::cout);
      if (failures > 0) {
        std::cout << failures << " check(s) failed\n";
        return 2;
      }
      std::cout << "all checks passed\n";
    } else if (cmd_plot->parsed()) {
      auto traces = load_traces(trace_paths);
      netsysid::write_file_atomic(plot_out, netsysid::emit_plot(traces));
      std::cout << "wrote " << plot_out << "\n";
    } else if (cmd_sum->parsed()) {
      print_summary(load_traces(trace_paths));
    }
  } catch (const netsysid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const netsysid::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
