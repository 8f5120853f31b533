#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "greenwave/fd_oracle.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/optimizer.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/simulation.hpp"

namespace greenwave {

std::string_view library_version();

// simulate

struct SimulateResult {
  MetricsReport metrics;
  std::size_t events = 0;
  std::size_t neps = 0;
};

/// Runs one path. When `events_csv` is given, writes one row per logged event
/// with every queue content after the basic event that produced it.
SimulateResult cmd_simulate(const Scenario& scenario, const ThetaVector& theta, std::uint64_t seed,
                            std::ostream* events_csv = nullptr);

void write_metrics_csv(std::ostream& out, const ArteryModel& model, const MetricsReport& m);

// optimize

enum class OptimizeMode : std::uint8_t { Batch, Online };

struct ExperimentReport {
  std::string scenario;
  OptimizeMode mode = OptimizeMode::Batch;
  double reverse_demand = 0.0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double cost_reduction_pct = 0.0;
  std::optional<double> initial_stop_ratio;  // artery direction
  std::optional<double> final_stop_ratio;
  std::optional<double> stop_ratio_reduction_pct;
  std::optional<double> initial_stop_ratio_reverse;
  std::optional<double> final_stop_ratio_reverse;
  std::vector<double> theta_opt;
  OptimizationLog log;
  double runtime_seconds = 0.0;
};

/// Batch: initial/final are the first and last evaluation rows. Online:
/// initial is the first window, final the mean over the last quarter of
/// the windows.
ExperimentReport cmd_optimize(const Scenario& scenario, const OptimizerConfig& config,
                              OptimizeMode mode);

/// Copy of a bidirectional scenario with the reverse-artery head demand replaced.
Scenario with_reverse_demand(const Scenario& scenario, double mean_rate);

void write_report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);

// validate

struct ValidationRow {
  int coordinate = 0;
  double ipa = 0.0;
  double ipa_std_error = 0.0;
  double fd = 0.0;
  double fd_std_error = 0.0;
  std::size_t order_changes = 0;
  bool sign_agrees = false;
  double relative_difference = 0.0;  // |ipa - fd| / max(|fd|, floor)
  bool fd_significant = false;       // |fd| exceeds its standard error
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  int sign_agreements = 0;
  double max_relative_difference = 0.0;
};

/// IPA against common-random-number finite differences on the same seeds.
ValidationReport cmd_validate(const Scenario& scenario, const ThetaVector& theta,
                              const FdConfig& config, double absolute_floor = 1e-6);

void write_validation_csv(std::ostream& out, const ValidationReport& report);

// scalability

struct ScalabilityRow {
  int intersections = 0;
  std::size_t events = 0;
  double ipa_seconds = 0.0;
  double sim_seconds = 0.0;
  double ipa_per_event_us = 0.0;
};

struct ScalabilityReport {
  std::vector<ScalabilityRow> rows;
  std::optional<double> slope;  // IPA seconds per intersection
  std::optional<double> intercept;
  std::optional<double> r_squared;
  std::optional<double> per_event_spread;  // max/min IPA cost per event
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares; absent with fewer than two distinct abscissae.
std::optional<LinearFit> fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Chains of each size built from the template's first intersection. IPA
/// time is measured by replaying the recorded observer calls of the engine
/// run into a fresh estimator, so it excludes event scheduling.
ScalabilityReport cmd_scalability(const Scenario& templ, const std::vector<int>& sizes,
                                  std::uint64_t seed, int paths = 3);

void write_scalability_csv(std::ostream& out, const ScalabilityReport& report);

// trace

void write_trace(std::ostream& out, const ArteryModel& model,
                 const std::vector<PropagationHop>& hops, int parameter);

/// manifest.json beside every output: command, flags, seed, version.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::map<std::string, std::string>& flags, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

}  // namespace greenwave
