#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "greenwave/arrival.hpp"
#include "greenwave/model.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/simulation.hpp"
#include "greenwave/sparse_vec.hpp"

namespace greenwave {

/// Derivative of a departure breakpoint's emission time, carried with the
/// front until it reaches the downstream queue. For burst heads this is the
/// memorized generation-time derivative (and y' = -s'); for tails the
/// burst-end derivative (r' = -s').
struct FrontDerivative {
  FrontKind kind = FrontKind::Interior;
  int burst = 0;
  SparseVec s_prime;
};

/// All derivatives of one sample path with respect to the 2N GREEN lengths.
struct DerivState {
  std::vector<SparseVec> x_prime;                     // per queue
  std::vector<SparseVec> last_switch;                 // per intersection
  std::vector<std::deque<FrontDerivative>> fronts;    // per link, FIFO

  void reset();
};

/// Local rates around an event for one queue. Rates "before" are left limits.
struct LocalRates {
  double alpha_before = 0.0;
  double alpha_after = 0.0;
  double beta_before = 0.0;
  double beta_after = 0.0;
  bool nonempty_before = false;
  bool nonempty_after = false;

  double xdot_before() const { return nonempty_before ? alpha_before - beta_before : 0.0; }
  double xdot_after() const { return nonempty_after ? alpha_after - beta_after : 0.0; }
};

// Event-time derivatives.

/// Queue emptying: tau' = -x'(tau^-) / (alpha - beta).
SparseVec empty_time_derivative(const SparseVec& x_prime, double alpha, double beta);
/// Light switch ending GREEN of `parameter`: previous switch derivative plus e_parameter.
SparseVec switch_time_derivative(const SparseVec& last_switch, int parameter);
/// Departure breakpoint emitted with derivative s' meeting the downstream queue
/// tail: tau' = v / (v + l*xdot^-) * (s' - (l/v) x'(tau^-)).
SparseVec arrival_time_derivative(const SparseVec& s_prime, const SparseVec& x_prime_down,
                                  double xdot_before, double vehicle_length, double speed);

/// Which state-derivative rule applies to one queue at an event.
enum class DerivCase : std::uint8_t {
  InsideEp,          // x' stays 0
  Emptied,           // E: x' becomes 0
  StartViaSwitch,    // S induced by G2R: x' = -alpha tau'
  StartViaFront,     // S induced by an arriving front: x' = (beta - alpha^+) tau'
  StartExogenous,    // S induced by an exogenous rate change: x' = 0
  RedInNep,          // G2R inside a NEP: x' -= h tau'
  GreenInNep,        // R2G inside a NEP: x' += h tau'
  FrontInNep,        // arrival-rate change inside a NEP: x' += (alpha^- - alpha^+) tau'
  Unaffected,        // exogenous change inside a NEP
};

DerivCase classify_case(Cause cause, const LocalRates& rates);

/// x'(tau^+) for one queue.
SparseVec state_derivative_update(DerivCase c, const SparseVec& x_prime, const SparseVec& tau_prime,
                                  const LocalRates& rates);

/// Per-NEP share of the cost and its gradient.
struct NepContribution {
  int queue = -1;
  int k = 0;
  double cost = 0.0;
  SparseVec gradient;
};

/// Sample cost L = (1/T) sum omega * integral of x and its gradient.
struct CostAccumulator {
  double cost = 0.0;
  std::vector<double> gradient;
  std::vector<NepContribution> per_nep;
};

/// Integrates piecewise-constant x' over every NEP using its derivative
/// snapshots. Throws DataError for malformed records.
CostAccumulator accumulate_cost_derivative(std::span<const NepRecord> neps,
                                           const ArteryModel& model, double horizon,
                                           bool breakdown = false);

struct IpaOptions {
  RateMode rate_mode = RateMode::ExactFluid;
  double rate_window = 20.0;
  bool record_snapshots = true;
  /// Treat rate changes inside a burst as exogenous when they reach the
  /// downstream queue (tau' = 0), as if they did not depend on the parameters.
  bool interior_fronts_exogenous = false;
  /// Keep a per-event derivative history for tracing and debugging.
  bool record_history = false;
};

/// One entry of the per-event derivative history.
struct DerivRecord {
  double t = 0.0;
  EventKind kind = EventKind::Horizon;
  Cause cause = Cause::Exogenous;
  int queue = -1;
  int intersection = -1;
  int link = -1;
  SparseVec tau_prime;
  SparseVec x_before;
  SparseVec x_after;
  bool nonempty_after = false;
};

/// Observer maintaining IPA derivatives along a running Simulation.
class IpaEngine : public PathObserver {
 public:
  IpaEngine(const ArteryModel& model, IpaOptions options = {});

  void on_event(const EventContext& ctx) override;
  void on_queue_change(const QueueChange& ch) override;
  void on_front_emitted(int link, const Front& front) override;
  void on_finish(double t) override;

  const DerivState& state() const { return state_; }
  const std::vector<DerivRecord>& history() const { return history_; }
  const SparseVec& current_tau_prime() const { return tau_; }

  /// Forgets all derivatives and restarts gradient integration at t. Used at
  /// online window boundaries: perturbations are measured from there on.
  void reset(double t);
  /// Integral over [reset time, t] of sum_q omega_q x'_q, dense.
  std::vector<double> integrated_gradient(double t) const;

  std::size_t degenerate_events() const { return degenerate_; }
  std::size_t events_seen() const { return events_; }

 private:
  double alpha_estimate(int q, double exact, double t) const;
  void integrate_to(int q, double t);

  const ArteryModel& model_;
  IpaOptions options_;
  DerivState state_;
  std::vector<ArrivalCounter> counters_;
  std::vector<bool> nonempty_;
  std::vector<double> integrated_since_;  // per queue
  SparseVec integral_;
  double reset_time_ = 0.0;

  SparseVec tau_;
  Cause cause_ = Cause::Exogenous;
  int event_queue_ = -1;
  double event_t_ = 0.0;
  EventKind event_kind_ = EventKind::Horizon;
  int event_intersection_ = -1;
  int event_link_ = -1;
  std::size_t degenerate_ = 0;
  std::size_t events_ = 0;
  std::vector<DerivRecord> history_;
};

struct PathGradient {
  std::uint64_t seed = 0;
  double cost = 0.0;
  std::vector<double> gradient;
  MetricsReport metrics;
  std::size_t events = 0;
};

/// One replication: simulate with the IPA observer attached and integrate.
PathGradient ipa_path_gradient(const Scenario& scenario, const ThetaVector& theta,
                               std::uint64_t seed, double horizon);

struct GradientEstimate {
  std::vector<double> mean;
  double mean_cost = 0.0;
  std::vector<PathGradient> paths;
};

/// Mean IPA gradient over seeds (replications run on the shared thread pool).
/// Throws PathFailure naming the first failing seed.
GradientEstimate ipa_gradient(const Scenario& scenario, const ThetaVector& theta,
                              std::span<const std::uint64_t> seeds, double horizon);

/// Hop of a parameter's perturbation along a path.
struct PropagationHop {
  enum class Kind : std::uint8_t { Join, PassThrough, Reset };
  Kind kind = Kind::Join;
  double t = 0.0;
  EventKind event = EventKind::Horizon;
  int queue = -1;
  double x_prime_before = 0.0;
  double x_prime_after = 0.0;
  double tau_prime = 0.0;
  bool breaks_green_wave = false;  // reset before the downstream light turned RED
};

/// Downstream propagation of parameter i: every front arrival that carried a
/// nonzero tau'_i into a queue and every emptying event that wiped x'_i.
std::vector<PropagationHop> propagation_trace(const std::vector<DerivRecord>& history,
                                              const ArteryModel& model, int parameter);

/// Runs one path with history recording and traces parameter i.
std::vector<PropagationHop> propagation_trace(const Scenario& scenario, const ThetaVector& theta,
                                              std::uint64_t seed, double horizon, int parameter);

std::string_view to_string(PropagationHop::Kind kind);

}  // namespace greenwave
