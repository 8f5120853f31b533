// greenwave: simulate, optimize and validate signal timings on a fluid artery.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "greenwave/csv.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/fd_oracle.hpp"
#include "greenwave/harness.hpp"
#include "greenwave/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace greenwave;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kScenario = 3, kModel = 4, kIo = 5 };

struct Common {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string rate_mode;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--scenario", c.scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Master seed (default: the scenario's)");
  app->add_option("--out", c.out_dir, "Output directory");
  app->add_option("--rate-mode", c.rate_mode, "IPA arrival rates")
      ->check(CLI::IsMember({"exact-fluid", "windowed-estimate"}));
}

Scenario load(const Common& c) {
  Scenario s = parse_scenario(c.scenario_path);
  if (c.seed) s.master_seed = *c.seed;
  if (c.rate_mode == "windowed-estimate") s.rate_mode = RateMode::WindowedEstimate;
  if (c.rate_mode == "exact-fluid") s.rate_mode = RateMode::ExactFluid;
  return s;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

std::map<std::string, std::string> base_flags(const Common& c) {
  std::map<std::string, std::string> flags{{"scenario", c.scenario_path}, {"out", c.out_dir}};
  if (c.seed) flags["seed"] = std::to_string(*c.seed);
  if (!c.rate_mode.empty()) flags["rate-mode"] = c.rate_mode;
  return flags;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + format_number(x);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid artery simulator with IPA-driven signal timing"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  Common common;

  auto* simulate = app.add_subcommand("simulate", "Run one sample path and report metrics");
  add_common(simulate, common);
  bool emit_events = false;
  simulate->add_flag("--emit-events", emit_events, "Write events.csv with queue contents");

  auto* optimize = app.add_subcommand("optimize", "Gradient descent on the GREEN lengths");
  add_common(optimize, common);
  std::string mode = "batch";
  std::optional<int> iterations;
  std::optional<int> replications;
  std::optional<double> window;
  std::optional<double> online_horizon;
  std::vector<double> sweep_reverse;
  optimize->add_option("--mode", mode, "batch or online")->check(CLI::IsMember({"batch", "online"}));
  optimize->add_option("--iterations", iterations, "Batch iterations");
  optimize->add_option("--replications", replications, "Gradient replications per iteration");
  optimize->add_option("--window", window, "Online update window, seconds");
  optimize->add_option("--horizon", online_horizon, "Online run length, seconds");
  optimize->add_option("--sweep-reverse", sweep_reverse,
                       "Reverse-artery demands; one report row per value")
      ->delimiter(',');

  auto* validate = app.add_subcommand("validate", "Compare IPA with finite differences");
  add_common(validate, common);
  int fd_seeds = 50;
  double fd_h = 0.5;
  std::string scheme = "central";
  validate->add_option("--fd-seeds", fd_seeds, "Common random number seeds")->check(CLI::PositiveNumber);
  validate->add_option("--fd-step", fd_h, "Finite-difference step, seconds")->check(CLI::PositiveNumber);
  validate->add_option("--scheme", scheme)->check(CLI::IsMember({"central", "forward"}));

  auto* scalability = app.add_subcommand("scalability", "IPA cost over chain length");
  add_common(scalability, common);
  std::vector<int> sizes{3, 5, 10, 20};
  int paths = 3;
  scalability->add_option("--sizes", sizes, "Intersection counts, ascending")->delimiter(',');
  scalability->add_option("--paths", paths, "Paths per size")->check(CLI::PositiveNumber);

  auto* trace = app.add_subcommand("trace", "Follow one parameter's perturbation downstream");
  add_common(trace, common);
  int parameter = 0;
  trace->add_option("--parameter", parameter, "Index 2(n-1)+d of the GREEN length")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const Scenario scenario = load(common);
    const fs::path out_dir = common.out_dir;
    fs::create_directories(out_dir);
    auto flags = base_flags(common);
    std::vector<std::string> outputs;

    if (*simulate) {
      std::optional<std::ofstream> events;
      if (emit_events) {
        events = open_output(out_dir / "events.csv");
        outputs.push_back("events.csv");
        flags["emit-events"] = "true";
      }
      const SimulateResult r = cmd_simulate(scenario, scenario.theta0, scenario.master_seed,
                                            events ? &*events : nullptr);
      auto metrics = open_output(out_dir / "metrics.csv");
      write_metrics_csv(metrics, scenario.model, r.metrics);
      outputs.push_back("metrics.csv");
      write_manifest(out_dir, "simulate", flags, scenario.master_seed, outputs);
      std::cout << "cost " << format_number(r.metrics.cost) << "  events " << r.events
                << "  neps " << r.neps << '\n';
    } else if (*optimize) {
      OptimizerConfig config = scenario.optimizer;
      if (iterations) config.iterations = *iterations;
      if (replications) config.replications = *replications;
      if (window) config.window = *window;
      if (online_horizon) config.online_horizon = *online_horizon;
      config.validate();
      flags["mode"] = mode;
      if (iterations) flags["iterations"] = std::to_string(*iterations);
      if (replications) flags["replications"] = std::to_string(*replications);
      if (window) flags["window"] = format_number(*window);
      if (online_horizon) flags["horizon"] = format_number(*online_horizon);
      const OptimizeMode m = mode == "online" ? OptimizeMode::Online : OptimizeMode::Batch;

      std::vector<ExperimentReport> reports;
      if (sweep_reverse.empty()) {
        reports.push_back(cmd_optimize(scenario, config, m));
      } else {
        flags["sweep-reverse"] = join(sweep_reverse);
        for (double rate : sweep_reverse)
          reports.push_back(cmd_optimize(with_reverse_demand(scenario, rate), config, m));
      }
      for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string name =
            reports.size() == 1 ? "log.csv" : "log_" + std::to_string(i) + ".csv";
        auto log = open_output(out_dir / name);
        reports[i].log.write_csv(log, scenario.model);
        outputs.push_back(name);
        std::cout << reports[i].scenario << " reverse " << format_number(reports[i].reverse_demand)
                  << "  cost " << format_number(reports[i].initial_cost) << " -> "
                  << format_number(reports[i].final_cost) << "  ("
                  << format_number(reports[i].cost_reduction_pct) << "%)\n";
      }
      auto report = open_output(out_dir / "report.csv");
      write_report_csv(report, reports);
      outputs.push_back("report.csv");
      write_manifest(out_dir, "optimize", flags, scenario.master_seed, outputs);
    } else if (*validate) {
      FdConfig fd;
      fd.h = fd_h;
      fd.scheme = scheme == "forward" ? FdScheme::Forward : FdScheme::Central;
      fd.seeds = validation_seeds(scenario.master_seed, fd_seeds);
      const ValidationReport r = cmd_validate(scenario, scenario.theta0, fd);
      auto out = open_output(out_dir / "validation.csv");
      write_validation_csv(out, r);
      flags["fd-seeds"] = std::to_string(fd_seeds);
      flags["fd-step"] = format_number(fd_h);
      flags["scheme"] = scheme;
      write_manifest(out_dir, "validate", flags, scenario.master_seed, {"validation.csv"});
      std::cout << "sign agreement " << r.sign_agreements << "/" << r.rows.size()
                << "  max relative difference " << format_number(r.max_relative_difference) << '\n';
    } else if (*scalability) {
      const ScalabilityReport r = cmd_scalability(scenario, sizes, scenario.master_seed, paths);
      auto out = open_output(out_dir / "scalability.csv");
      write_scalability_csv(out, r);
      std::string sz;
      for (int n : sizes) sz += (sz.empty() ? "" : ",") + std::to_string(n);
      flags["sizes"] = sz;
      flags["paths"] = std::to_string(paths);
      write_manifest(out_dir, "scalability", flags, scenario.master_seed, {"scalability.csv"});
      std::cout << "r_squared " << format_number(r.r_squared) << "  per-event spread "
                << format_number(r.per_event_spread) << '\n';
    } else if (*trace) {
      if (parameter < 0 || parameter >= scenario.model.parameter_count())
        throw DomainError("--parameter out of range");
      const auto hops = propagation_trace(scenario, scenario.theta0, scenario.master_seed,
                                          scenario.horizon, parameter);
      auto out = open_output(out_dir / "trace.txt");
      write_trace(out, scenario.model, hops, parameter);
      flags["parameter"] = std::to_string(parameter);
      write_manifest(out_dir, "trace", flags, scenario.master_seed, {"trace.txt"});
      std::cout << hops.size() << " hops\n";
    }
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kScenario;
  } catch (const ModelError& e) {
    std::cerr << "model violation: " << e.what() << '\n';
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
