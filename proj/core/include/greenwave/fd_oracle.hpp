#pragma once

#include <cstdint>
#include <vector>

#include "greenwave/model.hpp"
#include "greenwave/scenario.hpp"

namespace greenwave {

enum class FdScheme : std::uint8_t { Forward, Central };

struct FdConfig {
  double h = 1e-3;
  FdScheme scheme = FdScheme::Central;
  std::vector<std::uint64_t> seeds;
  double horizon = 0.0;  // 0: use the scenario horizon

  void validate() const;
};

/// Common-random-number finite-difference estimate of dL/dtheta_i.
struct FdEstimate {
  int coordinate = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::vector<double> per_seed;
  /// Seeds whose perturbed paths produced different event sequences.
  std::size_t order_changes = 0;

  bool order_changed() const { return order_changes > 0; }
};

/// Uses only run_sample_path: both perturbed paths share every random stream.
FdEstimate finite_difference_gradient(const Scenario& scenario, const ThetaVector& theta, int i,
                                      const FdConfig& config);

/// Independent seeds for oracle comparisons, derived from the master seed.
std::vector<std::uint64_t> validation_seeds(std::uint64_t master, int count);

std::vector<FdEstimate> finite_difference_all(const Scenario& scenario, const ThetaVector& theta,
                                              const FdConfig& config);

}  // namespace greenwave
