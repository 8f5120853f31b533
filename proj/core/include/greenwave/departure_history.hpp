#pragma once

#include <cstdint>
#include <deque>

namespace greenwave {

/// What a breakpoint of an upstream artery departure rate means downstream.
enum class FrontKind : std::uint8_t {
  BurstHead,  // rate rises from 0: emitted at G, arrives as J
  BurstTail,  // rate falls to 0: emitted at G^e, arrives as J^e
  Interior,   // rate change inside a burst: arrives as a RateChange
};

/// One breakpoint of beta_n^0 travelling towards the downstream queue.
struct Front {
  double emitted = 0.0;        // departure time s at the upstream stop line
  double rate = 0.0;           // departure rate from s onwards
  double previous_rate = 0.0;  // departure rate just before s
  int burst = 0;               // 1-based burst ordinal on this link
  int cycle = 0;               // GREEN cycle index of the origin at emission
  FrontKind kind = FrontKind::Interior;
};

FrontKind classify_front(double previous_rate, double rate);

/// Step-function record of an upstream departure rate covering everything
/// not yet delivered downstream. Entries are retired in emission order as
/// they reach the downstream queue, so the retained span never exceeds
/// max L_n / v_n.
class DepartureHistory {
 public:
  /// Appends a breakpoint. Throws AssumptionViolation if emission times
  /// go backwards.
  void push(const Front& front);
  /// Retires the oldest pending breakpoint (it reached the downstream queue).
  Front pop();

  bool pending() const noexcept { return !fronts_.empty(); }
  std::size_t pending_count() const noexcept { return fronts_.size(); }
  const Front& head() const { return fronts_.front(); }
  const std::deque<Front>& fronts() const noexcept { return fronts_; }

  /// Rate already delivered downstream and the emission time it started at.
  double delivered_rate() const noexcept { return delivered_rate_; }
  double delivered_since() const noexcept { return delivered_since_; }

  /// beta(s). Throws DataError when s precedes the retained span.
  double rate_at(double s) const;
  /// Volume departed over [a, b] within the retained span.
  double volume(double a, double b) const;

 private:
  std::deque<Front> fronts_;
  double delivered_rate_ = 0.0;
  double delivered_since_ = 0.0;
  double last_emitted_ = 0.0;
};

/// alpha_{n+1}^0(t) = beta_n^0(t - Delta).
double delayed_upstream_rate(const DepartureHistory& history, double t, double delta);

}  // namespace greenwave
