#pragma once

#include <string>

#include "greenwave/scenario.hpp"
#include "greenwave/scenario_io.hpp"

namespace fixtures {

inline std::string scenario_path(const std::string& name) {
  return std::string(GREENWAVE_SCENARIO_DIR) + "/" + name;
}

inline greenwave::Scenario paper() { return greenwave::parse_scenario(scenario_path("paper-3x.json")); }

inline greenwave::ArteryModel chain(int n, bool bidirectional = false) {
  return greenwave::ArteryModel(n, std::vector<double>(static_cast<std::size_t>(std::max(0, n - 1)), 200.0),
                                std::vector<double>(static_cast<std::size_t>(std::max(0, n - 1)), 10.0),
                                5.0, 1.3, bidirectional);
}

// One intersection, constant demand.
inline greenwave::Scenario single(double artery, double side, double g0 = 30, double g1 = 25,
                                  double horizon = 1000) {
  greenwave::DemandSpec d;
  d.side = {side};
  d.artery = artery;
  d.constant = true;
  return greenwave::make_scenario(chain(1), d, greenwave::ThetaVector({g0, g1}, 5, 120), horizon);
}

}  // namespace fixtures
