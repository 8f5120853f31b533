#include "greenwave/arrival.hpp"

#include <algorithm>
#include <cmath>

#include "greenwave/errors.hpp"
#include "greenwave/model.hpp"

namespace greenwave {

ArrivalProcess ArrivalProcess::on_off(double mean_rate, double mean_on, double mean_off,
                                      std::uint64_t stream) {
  ArrivalProcess p;
  p.mean_rate = mean_rate;
  p.mean_on = mean_on;
  p.mean_off = mean_off;
  p.on_rate = mean_off == 0.0 ? mean_rate : mean_rate * (mean_on + mean_off) / mean_on;
  p.stream = stream;
  return p;
}

ArrivalProcess ArrivalProcess::constant(double rate, std::uint64_t stream) {
  ArrivalProcess p;
  p.mean_rate = rate;
  p.on_rate = rate;
  p.mean_on = 1.0;
  p.mean_off = 0.0;
  p.stream = stream;
  return p;
}

void ArrivalProcess::validate() const {
  if (mean_rate < 0.0 || on_rate < 0.0) throw ScenarioError("arrivals", "rates >= 0 violated");
  if (!(mean_on > 0.0) || mean_off < 0.0)
    throw ScenarioError("arrivals", "meanOn > 0 and meanOff >= 0 required");
  const double implied = on_rate * duty_cycle();
  if (std::abs(implied - mean_rate) > 1e-12 * std::max(1.0, mean_rate))
    throw ScenarioError("arrivals", "onRate*meanOn/(meanOn+meanOff) = meanRate violated");
}

double rate_at(const RatePath& path, double t) {
  auto it = std::upper_bound(path.begin(), path.end(), t,
                             [](double v, const RateBreakpoint& b) { return v < b.t; });
  if (it == path.begin()) return 0.0;
  return std::prev(it)->rate;
}

double integrate(const RatePath& path, double a, double b) {
  if (b <= a || path.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double start = std::max(a, path[i].t);
    const double stop = std::min(b, i + 1 < path.size() ? path[i + 1].t : kInfinity);
    if (stop > start) total += path[i].rate * (stop - start);
  }
  return total;
}

ArrivalStream::ArrivalStream(const ArrivalProcess& process, std::uint64_t seed)
    : rng_(seed),
      mean_on_(process.mean_on),
      mean_off_(process.mean_off),
      on_rate_(process.on_rate),
      duty_(process.duty_cycle()) {
  if (process.is_constant()) {
    on_ = true;
    switching_ = false;
    next_switch_ = kInfinity;
    return;
  }
  switching_ = true;
  on_ = rng_.uniform() < duty_;
  next_switch_ = rng_.exponential(on_ ? mean_on_ : mean_off_);
}

void ArrivalStream::advance() {
  if (!switching_) return;
  on_ = !on_;
  next_switch_ += rng_.exponential(on_ ? mean_on_ : mean_off_);
}

void ArrivalStream::set_mean_rate(double mean_rate) { on_rate_ = mean_rate / duty_; }

RatePath sample_arrival_path(const ArrivalProcess& process, double horizon, std::uint64_t seed) {
  ArrivalStream stream(process, seed);
  RatePath path{{0.0, stream.rate()}};
  while (stream.next_switch() < horizon) {
    const double t = stream.next_switch();
    stream.advance();
    if (stream.rate() != path.back().rate) path.push_back({t, stream.rate()});
  }
  return path;
}

void ArrivalCounter::record(double t, double rate) {
  if (!history_.empty() && history_.back().t == t) {
    history_.back().rate = rate;
  } else {
    history_.push_back({t, rate});
  }
  // Keep the breakpoint in force at the start of the window.
  const double cutoff = t - window_;
  while (history_.size() >= 2 && history_[1].t <= cutoff) history_.pop_front();
}

double ArrivalCounter::estimate(double tau) const {
  if (history_.empty()) return 0.0;
  const double lo = std::max(0.0, tau - window_);
  const double length = tau - lo;
  if (length <= 0.0) return history_.back().rate;
  double volume = 0.0;
  for (std::size_t i = 0; i < history_.size(); ++i) {
    const double start = std::max(lo, history_[i].t);
    const double stop = std::min(tau, i + 1 < history_.size() ? history_[i + 1].t : kInfinity);
    if (stop > start) volume += history_[i].rate * (stop - start);
  }
  return volume / length;
}

double estimate_arrival_rate(const RatePath& history, double tau, double window) {
  if (!(window > 0.0)) throw DomainError("estimate_arrival_rate: window must be positive");
  const double lo = std::max(0.0, tau - window);
  const double length = tau - lo;
  if (length <= 0.0) return rate_at(history, tau);
  return integrate(history, lo, tau) / length;
}

}  // namespace greenwave
