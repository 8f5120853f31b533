#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace greenwave {

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based seed derivation: the seed for (master, a, b, ...) depends
/// only on that tuple, so adding replications or queues never shifts the
/// streams already in use.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Stream tags used with derive_seed.
enum class StreamTag : std::uint64_t {
  Arrival = 0x41525256,     // per-queue arrival process
  Gradient = 0x47524144,    // optimizer gradient replications
  Evaluation = 0x4556414c,  // held-out evaluation replications
  Validation = 0x56414c49,  // fd-oracle seeds
  Scalability = 0x5343414c,
};

constexpr std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

/// mt19937_64 with platform-independent uniform and exponential draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace greenwave
