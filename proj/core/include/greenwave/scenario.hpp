#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "greenwave/arrival.hpp"
#include "greenwave/model.hpp"
#include "greenwave/optimizer_config.hpp"

namespace greenwave {

/// Where the IPA estimator takes the arrival rates it needs at event times:
/// the engine's exact fluid rates, or windowed counts N_a / t_w as a
/// roadside detector would provide.
enum class RateMode : std::uint8_t { ExactFluid, WindowedEstimate };

std::string_view to_string(RateMode mode);

/// Step change of an exogenous mean arrival rate.
struct DemandPerturbation {
  double time = 0.0;
  int queue = -1;
  double mean_rate = 0.0;
};

struct Scenario {
  std::string name;
  ArteryModel model;
  /// One entry per queue; engaged exactly for the exogenous queues.
  std::vector<std::optional<ArrivalProcess>> arrivals;
  ThetaVector theta0;
  double horizon = 2000.0;
  std::uint64_t master_seed = 1;
  std::vector<DemandPerturbation> perturbations;
  RateMode rate_mode = RateMode::ExactFluid;
  double rate_window = 20.0;
  OptimizerConfig optimizer;

  const ArrivalProcess* arrival(int q) const {
    const auto& a = arrivals.at(static_cast<std::size_t>(q));
    return a ? &*a : nullptr;
  }

  /// Throws ScenarioError naming the violated invariant.
  void validate() const;
};

/// Uniform demand description used to build scenarios in code.
struct DemandSpec {
  std::vector<double> side;  // one mean rate per intersection
  double artery = 0.0;       // head of the forward artery (intersection 1)
  double reverse = 0.0;      // head of the reverse artery (intersection N)
  double mean_on = 10.0;
  double mean_off = 10.0;
  bool constant = false;     // constant fluid streams instead of ON/OFF
};

Scenario make_scenario(ArteryModel model, const DemandSpec& demand, ThetaVector theta0,
                       double horizon, std::uint64_t master_seed = 1);

/// Chain of `intersections` copies of the template's first intersection:
/// same link geometry, side demands and GREEN lengths repeated cyclically.
Scenario replicate_chain(const Scenario& base, int intersections);

}  // namespace greenwave
