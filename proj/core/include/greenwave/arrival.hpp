#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "greenwave/rng.hpp"

namespace greenwave {

/// Exogenous fluid arrivals: an ON/OFF process alternating `on_rate` and 0
/// with exponential holding times. The mean rate is
/// on_rate * mean_on / (mean_on + mean_off). A process with mean_off == 0 is
/// a constant stream.
struct ArrivalProcess {
  double mean_rate = 0.0;
  double on_rate = 0.0;
  double mean_on = 0.0;
  double mean_off = 0.0;
  std::uint64_t stream = 0;

  static ArrivalProcess on_off(double mean_rate, double mean_on, double mean_off,
                               std::uint64_t stream = 0);
  static ArrivalProcess constant(double rate, std::uint64_t stream = 0);

  bool is_constant() const { return mean_off == 0.0; }
  double duty_cycle() const { return is_constant() ? 1.0 : mean_on / (mean_on + mean_off); }
  void validate() const;
};

struct RateBreakpoint {
  double t;
  double rate;
};

/// Right-continuous step function; the first breakpoint is at t = 0.
using RatePath = std::vector<RateBreakpoint>;

double rate_at(const RatePath& path, double t);
/// Integral of the step function over [a, b].
double integrate(const RatePath& path, double a, double b);

/// Lazily generated sample path of one ArrivalProcess. The ON/OFF switching
/// sequence depends only on the seed; changing the mean rate rescales the ON
/// level without consuming random numbers, so perturbed and unperturbed runs
/// share their randomness.
class ArrivalStream {
 public:
  ArrivalStream() = default;
  ArrivalStream(const ArrivalProcess& process, std::uint64_t seed);

  double rate() const { return on_ ? on_rate_ : 0.0; }
  /// Time of the next ON/OFF switch, or +inf.
  double next_switch() const { return next_switch_; }
  /// Moves past next_switch().
  void advance();
  /// New mean arrival rate from now on (duty cycle unchanged).
  void set_mean_rate(double mean_rate);

 private:
  Rng rng_{0};
  double mean_on_ = 0.0;
  double mean_off_ = 0.0;
  double on_rate_ = 0.0;
  double duty_ = 1.0;
  bool on_ = false;
  bool switching_ = false;
  double next_switch_ = 0.0;
};

/// Full rate path over [0, T]. Only actual rate changes are recorded.
RatePath sample_arrival_path(const ArrivalProcess& process, double horizon, std::uint64_t seed);

/// Rolling record of an arrival-rate step function, pruned to a window,
/// used to estimate instantaneous rates the way a detector would.
class ArrivalCounter {
 public:
  explicit ArrivalCounter(double window = 20.0) : window_(window) {}

  void record(double t, double rate);
  /// N_a / t_w over [tau - t_w, tau], truncated at t = 0.
  double estimate(double tau) const;
  double window() const { return window_; }

 private:
  double window_;
  std::deque<RateBreakpoint> history_;
};

/// alpha_hat = N_a / t_w where N_a is the fluid volume in [tau - t_w, tau].
double estimate_arrival_rate(const RatePath& history, double tau, double window);

}  // namespace greenwave
