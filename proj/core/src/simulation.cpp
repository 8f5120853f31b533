#include "greenwave/simulation.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "detail/candidates.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/rng.hpp"

namespace greenwave {

using detail::Priority;
using detail::Rank;

namespace {

enum class Slot : std::uint8_t { Block, Switch, Arrival, Empty, Exogenous, Perturbation, Horizon };

struct Entry {
  double t = 0.0;
  Rank rank;
  Slot slot = Slot::Horizon;
  int id = 0;
  std::uint32_t version = 0;
};

struct Later {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.t != b.t) return a.t > b.t;
    return b.rank < a.rank;
  }
};

struct QueueRt {
  int n = 0;
  Flow flow = Flow::Artery;
  int phase = 0;
  int inbound = -1;
  int outbound = -1;
  double h = 0.0;
  double capacity = kInfinity;  // content at which the inbound link blocks
  double lv = 0.0;              // l / v of the inbound link

  double x = 0.0;
  double t_ref = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool nonempty = false;
  bool green = false;

  QueueTotals acc;
  double joined = 0.0;

  NepRecord nep;
  bool nep_open = false;
  int nep_count = 0;

  std::uint32_t v_empty = 0;
  std::uint32_t v_block = 0;
};

struct IntersectionRt {
  int green = 0;
  double green_start = 0.0;
  int cycle = 1;
  std::uint32_t version = 0;
};

struct LinkRt {
  LinkSpec spec;
  DepartureHistory history;
  int bursts = 0;
  int delivered_burst = 0;
  int delivered_cycle = 0;
  std::uint32_t version = 0;
};

struct ExoRt {
  bool active = false;
  ArrivalStream stream;
  std::uint32_t version = 0;
};

void advance(QueueRt& q, double t) {
  const double dt = t - q.t_ref;
  if (!(dt > 0.0)) return;
  const double xdot = q.alpha - q.beta;
  double x1 = q.x + xdot * dt;
  if (x1 < 0.0) x1 = 0.0;
  q.acc.area += 0.5 * (q.x + x1) * dt;
  q.acc.arrived += q.alpha * dt;
  q.acc.departed += q.beta * dt;
  if (q.nonempty) q.acc.stopped += q.alpha * dt;
  if (q.inbound >= 0) q.joined += q.alpha * (1.0 + q.lv * xdot) * dt;
  q.x = x1;
  q.t_ref = t;
}

double content_at(const QueueRt& q, double t) {
  if (!q.nonempty) return 0.0;
  return std::max(0.0, q.x + (q.alpha - q.beta) * (t - q.t_ref));
}

}  // namespace

double NepRecord::area() const {
  double total = 0.0;
  double t0 = xi;
  double x0 = 0.0;
  for (std::size_t p = 0; p < event_times.size(); ++p) {
    total += 0.5 * (x0 + x_samples[p]) * (event_times[p] - t0);
    t0 = event_times[p];
    x0 = x_samples[p];
  }
  total += 0.5 * (x0 + x_end) * (eta - t0);
  return total;
}

std::vector<double> Trajectory::throughput() const {
  std::vector<double> out;
  out.reserve(totals.queues.size());
  for (const auto& q : totals.queues) out.push_back(q.departed);
  return out;
}

std::vector<double> Trajectory::stopped() const {
  std::vector<double> out;
  out.reserve(totals.queues.size());
  for (const auto& q : totals.queues) out.push_back(q.stopped);
  return out;
}

struct Simulation::Impl {
  Impl(const Scenario& scenario, const ThetaVector& theta_in, std::uint64_t seed, double T,
       SimOptions opts);

  // Scheduling
  void push(double t, Rank rank, Slot slot, int id, std::uint32_t version) {
    heap.push(Entry{t, rank, slot, id, version});
  }
  bool valid(const Entry& e) const;
  Entry select();
  void schedule_switch(int n);
  void schedule_queue(int q);
  void schedule_arrival(int link);
  void schedule_exogenous(int q);

  // Processing
  void ensure_started();
  void process(const Entry& e);
  void process_switch(int n);
  void process_empty(int q);
  void process_arrival(int link);
  void process_exogenous(int q);
  void process_perturbation(int idx);
  void process_horizon();
  void change_exogenous_rate(int q, double rate);
  void update_queue(int q, std::optional<double> alpha, bool emptied);
  void emit_front(int link, double previous, double rate);
  void open_nep(int q);
  void close_nep(int q, bool truncated);
  void log(EventKind kind, int n, int d, Flow flow, int m = 0);
  void notify(const EventContext& ctx) {
    for (auto* o : observers) o->on_event(ctx);
  }
  bool is_green(const QueueRt& q) const { return inters[static_cast<std::size_t>(q.n)].green == q.phase; }
  SimEvent describe(const Entry& e) const;

  ArteryModel model;
  ThetaVector theta;
  double horizon;
  SimOptions options;
  std::vector<DemandPerturbation> perturbations;
  std::vector<bool> perturbation_done;

  double now = 0.0;
  bool started = false;
  bool finished = false;
  std::size_t processed = 0;

  std::vector<QueueRt> queues;
  std::vector<IntersectionRt> inters;
  std::vector<LinkRt> links;
  std::vector<ExoRt> exo;
  std::vector<PathObserver*> observers;

  std::vector<SimEvent> log_;
  std::deque<NepRecord> neps;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap;
};

Simulation::Impl::Impl(const Scenario& scenario, const ThetaVector& theta_in, std::uint64_t seed,
                       double T, SimOptions opts)
    : model(scenario.model), theta(theta_in), horizon(T), options(opts) {
  scenario.validate();
  theta.validate();
  if (theta.size() != static_cast<std::size_t>(model.parameter_count()))
    throw ScenarioError("theta", "expected 2N GREEN lengths");
  if (!(horizon > 0.0)) throw ScenarioError("horizon", "T > 0 violated");

  const int nq = model.queue_count();
  queues.resize(static_cast<std::size_t>(nq));
  exo.resize(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) {
    auto& Q = queues[static_cast<std::size_t>(q)];
    const QueueId id = model.queue(q);
    Q.n = id.n;
    Q.flow = id.flow;
    Q.phase = id.phase();
    Q.inbound = model.inbound_link(q);
    Q.outbound = model.outbound_link(q);
    Q.h = model.max_departure(q);
    if (Q.inbound >= 0) {
      const auto& link = model.links()[static_cast<std::size_t>(Q.inbound)];
      Q.capacity = link.length / model.vehicle_length();
      Q.lv = model.vehicle_length() / link.speed;
    }
    if (const ArrivalProcess* p = scenario.arrival(q)) {
      auto& E = exo[static_cast<std::size_t>(q)];
      E.active = true;
      E.stream = ArrivalStream(*p, derive_seed(seed, {tag(StreamTag::Arrival), p->stream}));
    }
  }
  inters.resize(static_cast<std::size_t>(model.intersections()));
  for (const auto& spec : model.links()) {
    LinkRt L;
    L.spec = spec;
    links.push_back(std::move(L));
  }
  perturbations = scenario.perturbations;
  std::stable_sort(perturbations.begin(), perturbations.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  perturbation_done.assign(perturbations.size(), false);
}

void Simulation::Impl::log(EventKind kind, int n, int d, Flow flow, int m) {
  if (!options.record_events) return;
  log_.push_back(SimEvent{kind, n, d, flow, m, now});
}

bool Simulation::Impl::valid(const Entry& e) const {
  const auto i = static_cast<std::size_t>(e.id);
  switch (e.slot) {
    case Slot::Block:
      return queues[i].v_block == e.version;
    case Slot::Switch:
      return inters[i].version == e.version;
    case Slot::Arrival:
      return links[i].version == e.version;
    case Slot::Empty:
      return queues[i].v_empty == e.version;
    case Slot::Exogenous:
      return exo[i].version == e.version;
    case Slot::Perturbation:
    case Slot::Horizon:
      return true;
  }
  return false;
}

Entry Simulation::Impl::select() {
  while (!heap.empty() && !valid(heap.top())) heap.pop();
  if (heap.empty()) throw InvalidStateError("event queue exhausted before the horizon");
  Entry best = heap.top();
  heap.pop();
  const double t0 = best.t;
  std::vector<Entry> stash;
  while (!heap.empty()) {
    const Entry& e = heap.top();
    if (!valid(e)) {
      heap.pop();
      continue;
    }
    if (e.t > t0 + kTieTolerance) break;
    if (e.rank < best.rank) {
      stash.push_back(best);
      best = e;
    } else {
      stash.push_back(e);
    }
    heap.pop();
  }
  // Nothing after the horizon, even within the tie tolerance.
  if (best.slot != Slot::Horizon && best.t > horizon) {
    for (auto& e : stash) {
      if (e.slot == Slot::Horizon) std::swap(e, best);
    }
  }
  for (const auto& e : stash) heap.push(e);
  return best;
}

void Simulation::Impl::schedule_switch(int n) {
  auto& I = inters[static_cast<std::size_t>(n)];
  ++I.version;
  const double t = std::max(now, I.green_start + theta.green(n, I.green));
  push(t, Rank{Priority::Switch, n, I.green, n}, Slot::Switch, n, I.version);
}

void Simulation::Impl::schedule_queue(int q) {
  auto& Q = queues[static_cast<std::size_t>(q)];
  ++Q.v_empty;
  ++Q.v_block;
  if (!Q.nonempty) return;
  const double xdot = Q.alpha - Q.beta;
  const Rank rank{Priority::Empty, Q.n, detail::sub_order(Q.flow), q};
  const double te = detail::empty_time(now, Q.x, xdot);
  if (te <= horizon) push(te, rank, Slot::Empty, q, Q.v_empty);
  if (Q.inbound >= 0) {
    const double tb = detail::block_time(now, Q.x, xdot, Q.capacity);
    if (tb <= horizon)
      push(tb, Rank{Priority::Block, Q.n, detail::sub_order(Q.flow), q}, Slot::Block, q, Q.v_block);
  }
}

void Simulation::Impl::schedule_arrival(int link) {
  auto& L = links[static_cast<std::size_t>(link)];
  ++L.version;
  if (!L.history.pending()) return;
  const Front& f = L.history.head();
  const auto& D = queues[static_cast<std::size_t>(L.spec.downstream_queue)];
  const double t = detail::arrival_time(now, f.emitted, L.spec, model.vehicle_length(),
                                        content_at(D, now), D.nonempty ? D.alpha - D.beta : 0.0);
  if (t > horizon) return;
  push(t, Rank{detail::arrival_priority(f.kind), D.n, detail::sub_order(D.flow), link},
       Slot::Arrival, link, L.version);
}

void Simulation::Impl::schedule_exogenous(int q) {
  auto& E = exo[static_cast<std::size_t>(q)];
  ++E.version;
  if (!E.active) return;
  const double t = E.stream.next_switch();
  if (t > horizon) return;
  const auto& Q = queues[static_cast<std::size_t>(q)];
  push(t, Rank{Priority::Exogenous, Q.n, detail::sub_order(Q.flow), q}, Slot::Exogenous, q,
       E.version);
}

void Simulation::Impl::ensure_started() {
  if (started) return;
  started = true;
  EventContext ctx;
  ctx.cause = Cause::Exogenous;
  ctx.t = 0.0;
  notify(ctx);
  for (int n = 0; n < model.intersections(); ++n) schedule_switch(n);
  for (int q = 0; q < model.queue_count(); ++q) {
    const auto& E = exo[static_cast<std::size_t>(q)];
    if (E.active && E.stream.rate() > 0.0) {
      const auto& Q = queues[static_cast<std::size_t>(q)];
      log(EventKind::AlphaUp0, Q.n, Q.phase, Q.flow);
      update_queue(q, E.stream.rate(), false);
    } else {
      update_queue(q, std::nullopt, false);
    }
    schedule_exogenous(q);
  }
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    const auto& p = perturbations[i];
    const auto& Q = queues[static_cast<std::size_t>(p.queue)];
    push(p.time, Rank{Priority::Perturbation, Q.n, detail::sub_order(Q.flow), static_cast<int>(i)},
         Slot::Perturbation, static_cast<int>(i), 0);
  }
  push(horizon, Rank{Priority::Horizon, 0, 0, 0}, Slot::Horizon, 0, 0);
}

void Simulation::Impl::open_nep(int q) {
  auto& Q = queues[static_cast<std::size_t>(q)];
  Q.nep = NepRecord{};
  Q.nep.queue = q;
  Q.nep.n = Q.n;
  Q.nep.d = Q.phase;
  Q.nep.flow = Q.flow;
  Q.nep.k = ++Q.nep_count;
  Q.nep.xi = now;
  Q.nep_open = true;
}

void Simulation::Impl::close_nep(int q, bool truncated) {
  auto& Q = queues[static_cast<std::size_t>(q)];
  if (!Q.nep_open) return;
  Q.nep.eta = now;
  Q.nep.truncated = truncated;
  Q.nep.x_end = truncated ? Q.x : 0.0;
  Q.nep_open = false;
  if (options.record_neps) neps.push_back(std::move(Q.nep));
  Q.nep = NepRecord{};
}

void Simulation::Impl::update_queue(int q, std::optional<double> alpha, bool emptied) {
  auto& Q = queues[static_cast<std::size_t>(q)];
  advance(Q, now);
  QueueChange ch;
  ch.queue = q;
  ch.t = now;
  ch.alpha_before = Q.alpha;
  ch.beta_before = Q.beta;
  ch.nonempty_before = Q.nonempty;
  ch.green_before = Q.green;

  if (alpha) Q.alpha = *alpha;
  if (emptied) {
    Q.x = 0.0;
    Q.nonempty = false;
  }
  const bool green = is_green(Q);
  if (Q.nonempty) {
    Q.beta = green ? Q.h : 0.0;
  } else if (green && Q.alpha <= Q.h) {
    Q.beta = Q.alpha;
  } else if (Q.alpha > 0.0) {
    Q.nonempty = true;
    Q.beta = green ? Q.h : 0.0;
  } else {
    Q.beta = 0.0;
  }
  Q.green = green;

  if (!ch.nonempty_before && Q.nonempty) {
    log(EventKind::XUp0, Q.n, Q.phase, Q.flow);
    log(EventKind::NepStart, Q.n, Q.phase, Q.flow);
    open_nep(q);
  } else if (ch.nonempty_before && Q.nonempty) {
    Q.nep.event_times.push_back(now);
    Q.nep.x_samples.push_back(Q.x);
  } else if (ch.nonempty_before && !Q.nonempty) {
    log(EventKind::XDown0, Q.n, Q.phase, Q.flow);
    log(EventKind::NepEnd, Q.n, Q.phase, Q.flow);
  }

  ch.x = Q.x;
  ch.alpha_after = Q.alpha;
  ch.beta_after = Q.beta;
  ch.nonempty_after = Q.nonempty;
  ch.green_after = green;
  ch.nep = Q.nonempty ? &Q.nep : nullptr;
  for (auto* o : observers) o->on_queue_change(ch);
  if (ch.nonempty_before && !Q.nonempty) close_nep(q, false);

  if (Q.outbound >= 0 && Q.beta != ch.beta_before) emit_front(Q.outbound, ch.beta_before, Q.beta);
  schedule_queue(q);
  if (Q.inbound >= 0) schedule_arrival(Q.inbound);
}

void Simulation::Impl::emit_front(int link, double previous, double rate) {
  auto& L = links[static_cast<std::size_t>(link)];
  const auto& U = queues[static_cast<std::size_t>(L.spec.upstream_queue)];
  const FrontKind kind = classify_front(previous, rate);
  if (kind == FrontKind::BurstHead) {
    ++L.bursts;
    log(EventKind::BurstGen, U.n, 0, U.flow, L.bursts);
  } else if (kind == FrontKind::BurstTail) {
    log(EventKind::BurstGenEnd, U.n, 0, U.flow, L.bursts);
  }
  Front f;
  f.emitted = now;
  f.rate = rate;
  f.previous_rate = previous;
  f.burst = L.bursts;
  f.cycle = inters[static_cast<std::size_t>(U.n)].cycle;
  f.kind = kind;
  L.history.push(f);
  for (auto* o : observers) o->on_front_emitted(link, f);
  if (L.history.pending_count() == 1) schedule_arrival(link);
}

void Simulation::Impl::process(const Entry& e) {
  now = std::max(now, e.t);
  ++processed;
  switch (e.slot) {
    case Slot::Block: {
      const auto& Q = queues[static_cast<std::size_t>(e.id)];
      std::ostringstream os;
      os << "queue (n=" << Q.n + 1 << ", " << to_string(Q.flow) << ") reached "
         << Q.capacity << " vehicles at t=" << now
         << ": road length exhausted, no-blocking assumption violated";
      throw BlockingViolation(os.str());
    }
    case Slot::Switch:
      process_switch(e.id);
      break;
    case Slot::Arrival:
      process_arrival(e.id);
      break;
    case Slot::Empty:
      process_empty(e.id);
      break;
    case Slot::Exogenous:
      process_exogenous(e.id);
      break;
    case Slot::Perturbation:
      process_perturbation(e.id);
      break;
    case Slot::Horizon:
      process_horizon();
      break;
  }
}

void Simulation::Impl::process_switch(int n) {
  auto& I = inters[static_cast<std::size_t>(n)];
  const int ended = I.green;
  log(EventKind::ZHitTheta, n, ended, detail::phase_flow(ended));
  log(EventKind::G2R, n, ended, detail::phase_flow(ended));
  log(EventKind::R2G, n, 1 - ended, detail::phase_flow(1 - ended));
  EventContext ctx;
  ctx.cause = Cause::LightSwitch;
  ctx.t = now;
  ctx.intersection = n;
  ctx.ended_phase = ended;
  notify(ctx);
  I.green = 1 - ended;
  I.green_start = now;
  if (I.green == 0) ++I.cycle;
  const int per = model.queues_per_intersection();
  for (int k = 0; k < per; ++k) update_queue(n * per + k, std::nullopt, false);
  schedule_switch(n);
}

void Simulation::Impl::process_empty(int q) {
  auto& Q = queues[static_cast<std::size_t>(q)];
  advance(Q, now);
  EventContext ctx;
  ctx.cause = Cause::QueueEmptied;
  ctx.t = now;
  ctx.intersection = Q.n;
  ctx.queue = q;
  ctx.alpha = Q.alpha;
  ctx.beta = Q.beta;
  ctx.x = Q.x;
  notify(ctx);
  update_queue(q, std::nullopt, true);
}

void Simulation::Impl::process_arrival(int link) {
  auto& L = links[static_cast<std::size_t>(link)];
  const Front f = L.history.head();
  const int q = L.spec.downstream_queue;
  auto& Q = queues[static_cast<std::size_t>(q)];
  advance(Q, now);
  if (f.previous_rate != Q.alpha) {
    std::ostringstream os;
    os << "burst order violated on link into intersection " << Q.n + 1 << " at t=" << now
       << ": front expects rate " << f.previous_rate << " but queue receives " << Q.alpha;
    throw AssumptionViolation(os.str());
  }
  const auto& U = queues[static_cast<std::size_t>(L.spec.upstream_queue)];
  log(detail::arrival_kind(f.kind), U.n, 0, U.flow, f.burst);
  EventContext ctx;
  ctx.cause = Cause::FrontArrival;
  ctx.t = now;
  ctx.intersection = Q.n;
  ctx.queue = q;
  ctx.link = link;
  ctx.alpha = Q.alpha;
  ctx.beta = Q.beta;
  ctx.x = Q.x;
  ctx.front = &f;
  notify(ctx);
  L.history.pop();
  L.delivered_burst = f.burst;
  L.delivered_cycle = f.cycle;
  update_queue(q, f.rate, false);
}

void Simulation::Impl::change_exogenous_rate(int q, double rate) {
  auto& Q = queues[static_cast<std::size_t>(q)];
  if (rate == Q.alpha) return;
  advance(Q, now);
  const EventKind kind = Q.alpha == 0.0 ? EventKind::AlphaUp0
                         : rate == 0.0  ? EventKind::AlphaDown0
                                        : EventKind::RateChange;
  log(kind, Q.n, Q.phase, Q.flow);
  EventContext ctx;
  ctx.cause = Cause::Exogenous;
  ctx.t = now;
  ctx.intersection = Q.n;
  ctx.queue = q;
  ctx.alpha = Q.alpha;
  ctx.beta = Q.beta;
  ctx.x = Q.x;
  notify(ctx);
  update_queue(q, rate, false);
}

void Simulation::Impl::process_exogenous(int q) {
  auto& E = exo[static_cast<std::size_t>(q)];
  E.stream.advance();
  schedule_exogenous(q);
  change_exogenous_rate(q, E.stream.rate());
}

void Simulation::Impl::process_perturbation(int idx) {
  const auto& p = perturbations[static_cast<std::size_t>(idx)];
  perturbation_done[static_cast<std::size_t>(idx)] = true;
  auto& E = exo[static_cast<std::size_t>(p.queue)];
  E.stream.set_mean_rate(p.mean_rate);
  change_exogenous_rate(p.queue, E.stream.rate());
}

void Simulation::Impl::process_horizon() {
  for (int q = 0; q < model.queue_count(); ++q) {
    auto& Q = queues[static_cast<std::size_t>(q)];
    advance(Q, now);
    if (Q.nep_open) close_nep(q, true);
  }
  log(EventKind::Horizon, -1, -1, Flow::Artery);
  finished = true;
  for (auto* o : observers) o->on_finish(now);
}

SimEvent Simulation::Impl::describe(const Entry& e) const {
  SimEvent ev;
  ev.tau = std::max(now, e.t);
  const auto i = static_cast<std::size_t>(e.id);
  switch (e.slot) {
    case Slot::Block:
    case Slot::Empty: {
      const auto& Q = queues[i];
      ev.kind = e.slot == Slot::Empty ? EventKind::XDown0 : EventKind::XUp0;
      ev.n = Q.n;
      ev.d = Q.phase;
      ev.flow = Q.flow;
      break;
    }
    case Slot::Switch: {
      const int d = inters[i].green;
      ev.kind = EventKind::ZHitTheta;
      ev.n = e.id;
      ev.d = d;
      ev.flow = detail::phase_flow(d);
      break;
    }
    case Slot::Arrival: {
      const auto& L = links[i];
      const Front& f = L.history.head();
      const auto& U = queues[static_cast<std::size_t>(L.spec.upstream_queue)];
      ev.kind = detail::arrival_kind(f.kind);
      ev.n = U.n;
      ev.d = 0;
      ev.flow = U.flow;
      ev.m = f.burst;
      break;
    }
    case Slot::Exogenous: {
      const auto& Q = queues[i];
      ev.kind = Q.alpha == 0.0 ? EventKind::AlphaUp0 : EventKind::AlphaDown0;
      ev.n = Q.n;
      ev.d = Q.phase;
      ev.flow = Q.flow;
      break;
    }
    case Slot::Perturbation: {
      const auto& Q = queues[static_cast<std::size_t>(perturbations[i].queue)];
      ev.kind = EventKind::RateChange;
      ev.n = Q.n;
      ev.d = Q.phase;
      ev.flow = Q.flow;
      break;
    }
    case Slot::Horizon:
      ev.kind = EventKind::Horizon;
      break;
  }
  return ev;
}

Simulation::Simulation(const Scenario& scenario, const ThetaVector& theta, std::uint64_t seed,
                       double horizon, SimOptions options)
    : impl_(std::make_unique<Impl>(scenario, theta, seed, horizon, options)) {}

Simulation::~Simulation() = default;

void Simulation::add_observer(PathObserver* observer) {
  if (impl_->started)
    throw InvalidStateError("observers must be attached before the first event");
  impl_->observers.push_back(observer);
}

bool Simulation::step() {
  impl_->ensure_started();
  if (impl_->finished) return false;
  const auto e = impl_->select();
  impl_->process(e);
  return !impl_->finished;
}

void Simulation::run() {
  while (step()) {
  }
}

void Simulation::run_until(double t) {
  impl_->ensure_started();
  while (!impl_->finished) {
    const auto e = impl_->select();
    if (e.t >= t) {
      impl_->heap.push(e);
      break;
    }
    impl_->process(e);
  }
  if (!impl_->finished) impl_->now = std::max(impl_->now, std::min(t, impl_->horizon));
}

void Simulation::set_theta(const ThetaVector& theta) {
  theta.validate();
  if (theta.size() != impl_->theta.size())
    throw ScenarioError("theta", "expected 2N GREEN lengths");
  impl_->theta = theta;
  if (!impl_->started) return;
  for (int n = 0; n < impl_->model.intersections(); ++n) impl_->schedule_switch(n);
}

SimEvent Simulation::peek() {
  impl_->ensure_started();
  if (impl_->finished) throw InvalidStateError("path already finished");
  const auto e = impl_->select();
  impl_->heap.push(e);
  return impl_->describe(e);
}

double Simulation::now() const { return impl_->now; }
bool Simulation::finished() const { return impl_->finished; }
const ThetaVector& Simulation::theta() const { return impl_->theta; }
const ArteryModel& Simulation::model() const { return impl_->model; }
const std::vector<SimEvent>& Simulation::events() const { return impl_->log_; }
const std::deque<NepRecord>& Simulation::neps() const { return impl_->neps; }
std::size_t Simulation::processed_events() const { return impl_->processed; }

SimState Simulation::snapshot() const {
  impl_->ensure_started();
  const Impl& s = *impl_;
  SimState st;
  st.t = s.now;
  st.horizon = s.horizon;
  for (const auto& Q : s.queues) {
    st.x.push_back(content_at(Q, s.now));
    st.alpha.push_back(Q.alpha);
    st.beta.push_back(Q.beta);
    st.nonempty.push_back(Q.nonempty);
  }
  for (int n = 0; n < s.model.intersections(); ++n) {
    const auto& I = s.inters[static_cast<std::size_t>(n)];
    std::array<double, 2> z{0.0, 0.0};
    z[static_cast<std::size_t>(I.green)] = s.now - I.green_start;
    std::array<int, 2> u{0, 0};
    u[static_cast<std::size_t>(I.green)] = 1;
    st.z.push_back(z);
    st.u.push_back(u);
    st.cycle.push_back(I.cycle);
  }
  for (std::size_t li = 0; li < s.links.size(); ++li) {
    const auto& L = s.links[li];
    const auto& U = s.queues[static_cast<std::size_t>(L.spec.upstream_queue)];
    std::vector<BurstRecord> records;
    auto find = [&](int burst) -> BurstRecord& {
      for (auto& r : records)
        if (r.burst == burst) return r;
      BurstRecord r;
      r.link = static_cast<int>(li);
      r.origin = U.n;
      r.burst = burst;
      records.push_back(r);
      return records.back();
    };
    if (L.history.delivered_rate() > 0.0) {
      auto& r = find(L.delivered_burst);
      r.cycle = L.delivered_cycle;
      r.joined = true;
    }
    for (const auto& f : L.history.fronts()) {
      st.fronts.push_back(FrontState{static_cast<int>(li), f});
      if (f.kind == FrontKind::BurstHead) {
        auto& r = find(f.burst);
        r.cycle = f.cycle;
        r.y_clock = s.now - f.emitted;
      } else if (f.kind == FrontKind::BurstTail) {
        const bool head_pending = std::any_of(records.begin(), records.end(), [&](const auto& r) {
          return r.burst == f.burst && !r.joined;
        });
        auto& r = find(f.burst);
        r.cycle = f.cycle;
        r.joined = !head_pending;
        r.r_clock = s.now - f.emitted;
      }
    }
    st.bursts.insert(st.bursts.end(), records.begin(), records.end());
  }
  for (std::size_t q = 0; q < s.queues.size(); ++q) {
    const auto& E = s.exo[q];
    st.next_arrival_switch.push_back(E.active && E.stream.next_switch() <= s.horizon
                                         ? E.stream.next_switch()
                                         : kInfinity);
  }
  for (std::size_t i = 0; i < s.perturbations.size(); ++i) {
    if (s.perturbation_done[i]) continue;
    st.next_perturbation = s.perturbations[i].time;
    st.next_perturbation_queue = s.perturbations[i].queue;
    break;
  }
  return st;
}

Totals Simulation::totals() const {
  const Impl& s = *impl_;
  Totals out;
  out.t = s.now;
  for (const auto& Q : s.queues) {
    QueueRt copy = Q;
    advance(copy, s.now);
    QueueTotals qt = copy.acc;
    qt.x = copy.nonempty ? copy.x : 0.0;
    out.queues.push_back(qt);
  }
  for (const auto& L : s.links) {
    LinkTotals lt;
    const auto up = static_cast<std::size_t>(L.spec.upstream_queue);
    const auto down = static_cast<std::size_t>(L.spec.downstream_queue);
    lt.discharged = out.queues[up].departed;
    QueueRt copy = s.queues[down];
    advance(copy, s.now);
    lt.joined = copy.joined;
    const double x_down = content_at(s.queues[down], s.now);
    const double delta = (L.spec.length - x_down * s.model.vehicle_length()) / L.spec.speed;
    const double from = std::max(s.now - delta, L.history.delivered_since());
    lt.in_transit = L.history.volume(from, s.now);
    out.links.push_back(lt);
  }
  return out;
}

Trajectory Simulation::take_trajectory() {
  Trajectory tr;
  tr.totals = totals();
  tr.events = std::move(impl_->log_);
  tr.neps.assign(std::make_move_iterator(impl_->neps.begin()),
                 std::make_move_iterator(impl_->neps.end()));
  impl_->neps.clear();
  tr.horizon = impl_->horizon;
  tr.processed_events = impl_->processed;
  return tr;
}

PathResult run_sample_path(const Scenario& scenario, const ThetaVector& theta, std::uint64_t seed,
                           double horizon, SimOptions options) {
  Simulation sim(scenario, theta, seed, horizon, options);
  sim.run();
  PathResult out;
  Totals begin;
  begin.t = 0.0;
  begin.queues.assign(static_cast<std::size_t>(scenario.model.queue_count()), QueueTotals{});
  out.trajectory = sim.take_trajectory();
  out.metrics = compute_metrics(scenario.model, begin, out.trajectory.totals);
  return out;
}

void apply_event(Simulation& sim, const SimEvent& expected) {
  const SimEvent next = sim.peek();
  if (!same_kind(next, expected) || std::abs(next.tau - expected.tau) > kTieTolerance) {
    std::ostringstream os;
    os << "apply_event: expected " << to_string(expected.kind) << " at " << expected.tau
       << " but the next scheduled event is " << to_string(next.kind) << " at " << next.tau;
    throw AssumptionViolation(os.str());
  }
  sim.step();
}

}  // namespace greenwave
