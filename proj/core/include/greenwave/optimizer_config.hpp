#pragma once

#include <cstdint>
#include <string_view>

namespace greenwave {

enum class Normalization : std::uint8_t { None, GradientNorm };

std::string_view to_string(Normalization n);

/// Step schedule rho_l = rho0 / l^decay for l = 1, 2, ...
struct OptimizerConfig {
  double rho0 = 5.0;
  double decay = 0.6;
  int iterations = 20;
  int replications = 10;
  int evaluation_replications = 10;
  double window = 1500.0;          // online update period W, seconds
  double online_horizon = 43000.0;  // online path length, seconds
  Normalization normalization = Normalization::GradientNorm;

  double step(int l) const;
  void validate() const;
};

}  // namespace greenwave
