#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "greenwave/arrival.hpp"
#include "greenwave/departure_history.hpp"
#include "greenwave/events.hpp"
#include "greenwave/model.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/sparse_vec.hpp"

namespace greenwave {

/// Two candidate times closer than this are treated as simultaneous.
inline constexpr double kTieTolerance = 1e-9;
/// Queue contents below this are treated as zero when deciding emptiness.
inline constexpr double kContentTolerance = 1e-9;

/// One non-empty period of a queue. x is linear between the listed events,
/// so (event_times, x_samples) describe x exactly over [xi, eta].
struct NepRecord {
  int queue = -1;
  int n = -1;
  int d = -1;
  Flow flow = Flow::Artery;
  int k = 0;  // 1-based ordinal on this queue
  double xi = 0.0;
  double eta = 0.0;
  bool truncated = false;             // still open at the horizon; eta == T
  std::vector<double> event_times;    // interior events t^1 <= ... <= t^P
  std::vector<double> x_samples;      // x at each interior event
  double x_end = 0.0;                 // x(eta), nonzero only when truncated
  /// x' just after xi and after each interior event; filled by the IPA engine.
  std::vector<SparseVec> deriv_snapshots;

  /// Integral of x over [xi, eta].
  double area() const;
};

/// Running integrals of one queue over [0, t].
struct QueueTotals {
  double area = 0.0;      // integral of x
  double arrived = 0.0;   // integral of alpha
  double departed = 0.0;  // integral of beta
  double stopped = 0.0;   // integral of alpha while the queue is non-empty
  double x = 0.0;         // x(t)
};

/// Flow balance of one link at a time instant.
struct LinkTotals {
  double discharged = 0.0;  // upstream departures onto the link
  double joined = 0.0;      // downstream arrivals mapped back to departure time
  double in_transit = 0.0;  // departed but not yet arrived
};

struct Totals {
  double t = 0.0;
  std::vector<QueueTotals> queues;
  std::vector<LinkTotals> links;
};

struct MetricsReport {
  double cost = 0.0;  // weighted time-average queue content over [t0, t1]
  double mean_queue_total = 0.0;
  std::optional<double> wait_artery;   // Little's law, seconds
  std::optional<double> wait_side;
  std::optional<double> wait_reverse;
  std::optional<double> stop_ratio_artery;
  std::optional<double> stop_ratio_reverse;
  std::vector<double> queue_mean;  // per queue
};

/// Metrics over [begin.t, end.t] from two totals snapshots of the same path.
MetricsReport compute_metrics(const ArteryModel& model, const Totals& begin, const Totals& end);

/// Stop ratio of one artery direction: stopped / arrived, summed over the
/// direction's artery queues. Absent when nothing arrived.
std::optional<double> stop_ratio(const ArteryModel& model, const Totals& begin,
                                 const Totals& end, Flow direction);

struct Trajectory {
  std::vector<SimEvent> events;
  std::vector<NepRecord> neps;
  Totals totals;
  double horizon = 0.0;
  std::size_t processed_events = 0;

  std::vector<double> throughput() const;  // departed volume per queue
  std::vector<double> stopped() const;     // stopped volume per queue
};

/// State of the hybrid system at one instant, detached from the engine.
struct BurstRecord {
  int link = -1;
  int origin = -1;
  int burst = 0;
  int cycle = 0;
  double y_clock = 0.0;
  double r_clock = 0.0;
  bool joined = false;
  bool ended = false;
};

struct FrontState {
  int link = -1;
  Front front;
};

struct SimState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<bool> nonempty;
  std::vector<std::array<double, 2>> z;  // per intersection, right limits
  std::vector<std::array<int, 2>> u;
  std::vector<int> cycle;
  std::vector<BurstRecord> bursts;
  std::vector<FrontState> fronts;               // undelivered, per link FIFO
  std::vector<double> next_arrival_switch;      // per queue, +inf when none
  double next_perturbation = kInfinity;
  int next_perturbation_queue = -1;
  double horizon = 0.0;
};

/// What caused a basic event, as seen by observers.
enum class Cause : std::uint8_t { LightSwitch, FrontArrival, QueueEmptied, Exogenous };

struct EventContext {
  Cause cause = Cause::Exogenous;
  double t = 0.0;
  int intersection = -1;
  int ended_phase = -1;  // LightSwitch: phase whose GREEN ended
  int queue = -1;
  int link = -1;
  double alpha = 0.0;  // target queue, just before the event
  double beta = 0.0;
  double x = 0.0;
  const Front* front = nullptr;  // FrontArrival
};

struct QueueChange {
  int queue = -1;
  double t = 0.0;
  double x = 0.0;
  double alpha_before = 0.0;
  double alpha_after = 0.0;
  double beta_before = 0.0;
  double beta_after = 0.0;
  bool nonempty_before = false;
  bool nonempty_after = false;
  bool green_before = false;
  bool green_after = false;
  NepRecord* nep = nullptr;  // open NEP after the change, if any
};

/// Hooks called synchronously while the engine processes events. For each
/// basic event the order is on_event, then one on_queue_change per queue
/// it touches (possibly with on_front_emitted in between).
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void on_event(const EventContext&) {}
  virtual void on_queue_change(const QueueChange&) {}
  virtual void on_front_emitted(int /*link*/, const Front&) {}
  virtual void on_finish(double /*t*/) {}
};

struct SimOptions {
  bool record_events = true;
  bool record_neps = true;
};

/// Event-driven engine for one sample path.
class Simulation {
 public:
  Simulation(const Scenario& scenario, const ThetaVector& theta, std::uint64_t seed,
             double horizon, SimOptions options = {});
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
  ~Simulation();

  void add_observer(PathObserver* observer);

  /// Processes the next basic event; false once the horizon has been handled.
  bool step();
  /// Processes every event up to and including the horizon.
  void run();
  /// Processes all events strictly before t and advances the clock to t.
  void run_until(double t);
  /// New GREEN lengths from now on; running GREEN phases keep their start.
  void set_theta(const ThetaVector& theta);

  /// Time and identity of the event step() would process next.
  SimEvent peek();

  double now() const;
  bool finished() const;
  const ThetaVector& theta() const;
  const ArteryModel& model() const;
  SimState snapshot() const;
  Totals totals() const;  // integrals over [0, now]

  const std::vector<SimEvent>& events() const;
  const std::deque<NepRecord>& neps() const;
  std::size_t processed_events() const;

  Trajectory take_trajectory();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PathResult {
  Trajectory trajectory;
  MetricsReport metrics;
};

/// Runs one full path over [0, T].
PathResult run_sample_path(const Scenario& scenario, const ThetaVector& theta,
                           std::uint64_t seed, double horizon, SimOptions options = {});

/// Next basic event from a detached state, using the engine's candidate
/// rules and tie order. Exogenous switches are reported as AlphaUp0 or
/// AlphaDown0 depending on the current rate.
SimEvent next_event(const SimState& state, const ThetaVector& theta, const ArteryModel& model);

/// Processes `expected` on the engine after checking it is the scheduled next
/// event. Throws AssumptionViolation otherwise.
void apply_event(Simulation& sim, const SimEvent& expected);

}  // namespace greenwave
