#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "greenwave/model.hpp"
#include "greenwave/optimizer_config.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/simulation.hpp"

namespace greenwave {

/// theta - rho * g (g normalized to unit length under GradientNorm), clipped
/// to the bounds. Throws DomainError on a non-finite gradient.
ThetaVector update_theta(const ThetaVector& theta, std::span<const double> gradient, double rho,
                         Normalization normalization);

/// One row of an optimization log. Batch rows are iterations (row 0 is the
/// starting point); online rows are update windows.
struct IterationRecord {
  int iteration = 0;
  double t_begin = 0.0;  // online window, seconds
  double t_end = 0.0;
  std::vector<double> theta;  // parameters in force for this row
  MetricsReport metrics;      // evaluation seeds (batch) or the window itself (online)
  double gradient_cost = 0.0; // mean cost on the gradient paths
  std::vector<double> gradient;  // empty on the final batch row
  double step = 0.0;
};

struct OptimizationLog {
  std::string mode;  // "batch" or "online"
  std::vector<IterationRecord> rows;
  std::vector<double> final_theta;

  void write_csv(std::ostream& out, const ArteryModel& model) const;
};

std::vector<std::uint64_t> gradient_seeds(std::uint64_t master, int iteration, int replications);
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int replications);

/// Mean metrics over seeds (costs and ratios averaged across paths).
MetricsReport evaluate_theta(const Scenario& scenario, const ThetaVector& theta,
                             std::span<const std::uint64_t> seeds, double horizon);

OptimizationLog batch_optimize(const Scenario& scenario, const ThetaVector& theta0,
                               const OptimizerConfig& config);

/// Single continuous path of length `total`; GREEN lengths are updated every
/// config.window seconds from the IPA gradient of the latest window.
OptimizationLog online_optimize(const Scenario& scenario, const ThetaVector& theta0,
                                const OptimizerConfig& config, double total);

int online_update_count(double total, double window);

}  // namespace greenwave
