#include <doctest.h>

#include <cmath>
#include <functional>

#include "fixtures.hpp"
#include "greenwave/departure_history.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/simulation.hpp"

using namespace greenwave;

namespace {

// Detached state with every candidate disabled except what the test sets up.
SimState quiet_state(const Scenario& s, double t) {
  Simulation sim(s, s.theta0, 1, s.horizon);
  SimState st = sim.snapshot();
  st.t = t;
  std::fill(st.x.begin(), st.x.end(), 0.0);
  std::fill(st.alpha.begin(), st.alpha.end(), 0.0);
  std::fill(st.beta.begin(), st.beta.end(), 0.0);
  std::fill(st.nonempty.begin(), st.nonempty.end(), false);
  std::fill(st.next_arrival_switch.begin(), st.next_arrival_switch.end(), kInfinity);
  for (auto& z : st.z) z = {1.0, 0.0};
  for (auto& u : st.u) u = {1, 0};
  st.fronts.clear();
  st.next_perturbation_queue = -1;
  return st;
}

double bisect(double lo, double hi, const std::function<double(double)>& f) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("next event: queue emptying") {
  const Scenario s = fixtures::single(0.25, 0.0, 100, 25);
  SimState st = quiet_state(s, 50.0);
  const int q = s.model.queue_index(0, Flow::Artery);
  st.x[static_cast<std::size_t>(q)] = 2.1;
  st.alpha[static_cast<std::size_t>(q)] = 0.25;
  st.beta[static_cast<std::size_t>(q)] = 1.3;
  st.nonempty[static_cast<std::size_t>(q)] = true;
  const SimEvent e = next_event(st, s.theta0, s.model);
  CHECK(e.kind == EventKind::XDown0);
  CHECK(e.tau == doctest::Approx(52.0));
  CHECK(e.flow == Flow::Artery);
}

TEST_CASE("next event: burst head meets a moving queue tail") {
  DemandSpec d;
  d.side = {0, 0};
  d.constant = true;
  const Scenario s = make_scenario(fixtures::chain(2), d, ThetaVector({100, 25, 100, 25}, 5, 120), 1000);
  SimState st = quiet_state(s, 100.0);
  const int down = s.model.queue_index(1, Flow::Artery);
  const auto di = static_cast<std::size_t>(down);
  // y = 12 at t = 100, Delta = 15 and shrinking at 0.105 s/s
  st.x[di] = 10.0;
  st.alpha[di] = 0.21;
  st.nonempty[di] = true;
  st.u[1] = {0, 1};
  st.z[1] = {0.0, 1.0};
  Front f;
  f.emitted = 88.0;
  f.rate = 1.3;
  f.burst = 1;
  f.kind = FrontKind::BurstHead;
  st.fronts.push_back({0, f});
  const SimEvent e = next_event(st, s.theta0, s.model);
  CHECK(e.kind == EventKind::BurstJoin);
  CHECK(e.m == 1);
  const double root = bisect(0, 10, [](double u) { return 12.0 + u - (15.0 - 0.105 * u); });
  CHECK(e.tau - 100.0 == doctest::Approx(root).epsilon(1e-12));
  CHECK(e.tau - 100.0 == doctest::Approx(2.715).epsilon(1e-3));
}

TEST_CASE("next event: light switch wins a tie with emptying") {
  const Scenario s = fixtures::single(0.25, 0.0, 30, 25);
  SimState st = quiet_state(s, 50.0);
  const auto q = static_cast<std::size_t>(s.model.queue_index(0, Flow::Artery));
  st.x[q] = 2.1;
  st.alpha[q] = 0.25;
  st.beta[q] = 1.3;
  st.nonempty[q] = true;
  st.z[0] = {28.0, 0.0};
  const SimEvent e = next_event(st, s.theta0, s.model);
  CHECK(e.kind == EventKind::ZHitTheta);
  CHECK(e.tau == doctest::Approx(52.0));
}

TEST_CASE("next event: nothing pending returns the horizon") {
  const Scenario s = fixtures::single(0.0, 0.0, 30, 25, 40);
  SimState st = quiet_state(s, 20.0);
  st.z[0] = {1.0, 0.0};
  CHECK(next_event(st, ThetaVector({500, 500}, 5, 1000), s.model).kind == EventKind::Horizon);
}

TEST_CASE("next event agrees with the engine") {
  Scenario s = fixtures::paper();
  s.horizon = 300;
  Simulation sim(s, s.theta0, 4, s.horizon);
  for (int i = 0; i < 200 && !sim.finished(); ++i) {
    const SimEvent expected = next_event(sim.snapshot(), s.theta0, s.model);
    const SimEvent peeked = sim.peek();
    CHECK(same_kind(expected, peeked));
    CHECK(expected.tau == doctest::Approx(peeked.tau).epsilon(1e-12));
    apply_event(sim, expected);
  }
}

TEST_CASE("apply_event rejects an event that is not next") {
  const Scenario s = fixtures::single(0.25, 0.1);
  Simulation sim(s, s.theta0, 1, s.horizon);
  SimEvent wrong = sim.peek();
  wrong.kind = EventKind::BurstJoin;
  wrong.m = 7;
  CHECK_THROWS_AS(apply_event(sim, wrong), AssumptionViolation);
}

TEST_CASE("delayed upstream rate") {
  DepartureHistory empty;
  CHECK(delayed_upstream_rate(empty, 50, 15) == 0.0);

  DepartureHistory h;
  Front up;
  up.emitted = 100;
  up.rate = 1.3;
  up.kind = classify_front(0.0, 1.3);
  CHECK(up.kind == FrontKind::BurstHead);
  h.push(up);
  CHECK(delayed_upstream_rate(h, 114.9, 15) == 0.0);
  CHECK(delayed_upstream_rate(h, 115.0, 15) == 1.3);
  CHECK(delayed_upstream_rate(h, 130.0, 15) == 1.3);
  CHECK(h.volume(100, 110) == doctest::Approx(13.0));

  Front back;
  back.emitted = 90;
  CHECK_THROWS_AS(h.push(back), AssumptionViolation);
  CHECK(classify_front(1.3, 0.0) == FrontKind::BurstTail);
  CHECK(classify_front(1.3, 0.25) == FrontKind::Interior);
}

TEST_CASE("a draining downstream queue makes bursts join early") {
  // Head departs while the downstream queue is long, so it meets the tail
  // before the free-flow travel time.
  DemandSpec d;
  d.side = {0.05, 0.0};
  d.artery = 0.3;
  d.constant = true;
  const Scenario s = make_scenario(fixtures::chain(2), d, ThetaVector({30, 25, 20, 40}, 5, 120), 600);
  const PathResult r = run_sample_path(s, s.theta0, 1, s.horizon);
  double gen = -1;
  bool early = false;
  for (const auto& e : r.trajectory.events) {
    if (e.kind == EventKind::BurstGen && e.n == 0) gen = e.tau;
    if (e.kind == EventKind::BurstJoin && e.n == 0 && gen >= 0) {
      CHECK(e.tau - gen <= 20.0 + 1e-9);
      if (e.tau - gen < 20.0 - 1e-6) early = true;
    }
  }
  CHECK(early);
}

TEST_CASE("side queue triangle wave") {
  const Scenario s = fixtures::single(0.0, 0.1, 30, 25, 200);
  const PathResult r = run_sample_path(s, s.theta0, 1, s.horizon);
  const int side = s.model.queue_index(0, Flow::Side);
  std::vector<const NepRecord*> neps;
  for (const auto& n : r.trajectory.neps)
    if (n.queue == side) neps.push_back(&n);
  REQUIRE(neps.size() >= 2);
  const NepRecord& first = *neps[0];
  CHECK(first.xi == doctest::Approx(0.0));
  CHECK(first.eta == doctest::Approx(30.0 + 3.0 / 1.2));
  double peak = 0.0;
  for (double x : first.x_samples) peak = std::max(peak, x);
  CHECK(peak == doctest::Approx(3.0));
  CHECK(first.area() == doctest::Approx(0.5 * 3.0 * 32.5));
  // next RED of the side road starts at 55
  CHECK(neps[1]->xi == doctest::Approx(55.0));
  CHECK(neps[1]->eta == doctest::Approx(87.5));
}

TEST_CASE("zero demand gives zero cost and no NEPs") {
  const Scenario s = fixtures::single(0.0, 0.0);
  const PathResult r = run_sample_path(s, s.theta0, 1, s.horizon);
  CHECK(r.metrics.cost == 0.0);
  CHECK(r.trajectory.neps.empty());
  CHECK_FALSE(r.metrics.stop_ratio_artery.has_value());
}

TEST_CASE("paper scenario cost is positive and finite") {
  const Scenario s = fixtures::paper();
  const PathResult r = run_sample_path(s, s.theta0, s.master_seed, s.horizon);
  CHECK(r.metrics.cost > 0.0);
  CHECK(std::isfinite(r.metrics.cost));
  REQUIRE(r.metrics.stop_ratio_artery.has_value());
  CHECK(*r.metrics.stop_ratio_artery > 0.0);
  CHECK(*r.metrics.stop_ratio_artery <= 1.0);
}

TEST_CASE("engine is deterministic per seed") {
  const Scenario s = fixtures::paper();
  const PathResult a = run_sample_path(s, s.theta0, 11, s.horizon);
  const PathResult b = run_sample_path(s, s.theta0, 11, s.horizon);
  const PathResult c = run_sample_path(s, s.theta0, 12, s.horizon);
  CHECK(a.trajectory.events == b.trajectory.events);
  CHECK(a.metrics.cost == b.metrics.cost);
  CHECK(a.metrics.cost != c.metrics.cost);
}

TEST_CASE("flow is conserved on queues and links") {
  Scenario s = fixtures::paper();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PathResult r = run_sample_path(s, s.theta0, seed, s.horizon);
    for (const auto& q : r.trajectory.totals.queues) {
      CHECK(q.x >= 0.0);
      CHECK(q.arrived - q.departed == doctest::Approx(q.x).epsilon(1e-9).scale(q.arrived));
    }
    for (const auto& l : r.trajectory.totals.links)
      CHECK(l.discharged == doctest::Approx(l.joined + l.in_transit).epsilon(1e-9));
  }
}

TEST_CASE("bursts start at R2G with a queue") {
  const Scenario s = fixtures::paper();
  Simulation sim(s, s.theta0, 3, s.horizon);
  const int q = s.model.queue_index(0, Flow::Artery);
  int checked = 0;
  while (!sim.finished()) {
    const SimEvent next = sim.peek();
    const bool queued = sim.snapshot().x[static_cast<std::size_t>(q)] > 1e-6;
    const std::size_t before = sim.events().size();
    sim.step();
    bool r2g = false;
    bool gen = false;
    for (std::size_t i = before; i < sim.events().size(); ++i) {
      const SimEvent& e = sim.events()[i];
      r2g |= e.kind == EventKind::R2G && e.n == 0 && e.d == 0;
      gen |= e.kind == EventKind::BurstGen && e.n == 0;
    }
    if (r2g && queued && next.kind == EventKind::ZHitTheta) {
      CHECK(gen);
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("stop ratio bounds") {
  const ArteryModel m = fixtures::chain(1);
  Totals a;
  a.queues.assign(2, QueueTotals{});
  Totals b = a;
  b.t = 100;
  CHECK_FALSE(stop_ratio(m, a, b, Flow::Artery).has_value());
  b.queues[0].arrived = 20;
  CHECK(*stop_ratio(m, a, b, Flow::Artery) == 0.0);
  b.queues[0].stopped = 20;
  CHECK(*stop_ratio(m, a, b, Flow::Artery) == 1.0);
}

TEST_CASE("single intersection has nothing to propagate") {
  const Scenario s = fixtures::single(0.3, 0.2);
  for (int i = 0; i < 2; ++i)
    CHECK(propagation_trace(s, s.theta0, 1, s.horizon, i).empty());
}
