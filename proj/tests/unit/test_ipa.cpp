#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/fd_oracle.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/optimizer.hpp"
#include "greenwave/rng.hpp"

using namespace greenwave;

TEST_CASE("event time derivatives") {
  const SparseVec e = empty_time_derivative(SparseVec::unit(0, 2.0), 0.2, 1.3);
  CHECK(e[0] == doctest::Approx(1.8181818181818181));
  CHECK_THROWS_AS(empty_time_derivative(SparseVec::unit(0, 2.0), 1.3, 1.3), DegenerateEventError);

  const SparseVec g = switch_time_derivative(SparseVec{}, 0);
  CHECK(g.dense(4) == std::vector<double>{1, 0, 0, 0});
  const SparseVec g2 = switch_time_derivative(g, 1);
  CHECK(g2.dense(4) == std::vector<double>{1, 1, 0, 0});

  // burst head joins an empty RED queue
  const SparseVec j = arrival_time_derivative(SparseVec::unit(0, 1.0), SparseVec{}, 0.0, 5, 10);
  CHECK(j[0] == doctest::Approx(1.0));
  // the tail is moving: v / (v + l xdot)
  const SparseVec j2 =
      arrival_time_derivative(SparseVec::unit(0, 1.0), SparseVec::unit(0, 0.5), -1.0, 5, 10);
  CHECK(j2[0] == doctest::Approx(10.0 / 5.0 * (1.0 - 0.25)));
  CHECK_THROWS_AS(arrival_time_derivative(SparseVec::unit(0, 1.0), SparseVec{}, -2.0, 5, 10),
                  DegenerateEventError);
}

TEST_CASE("state derivative cases") {
  LocalRates r;
  r.alpha_before = r.alpha_after = 0.25;
  r.beta_before = 1.3;
  r.beta_after = 0.0;
  r.nonempty_before = false;
  r.nonempty_after = true;
  // side queue starts when the artery GREEN ends
  CHECK(classify_case(Cause::LightSwitch, r) == DerivCase::StartViaSwitch);
  const SparseVec tau = SparseVec::unit(1, 1.0);
  CHECK(state_derivative_update(DerivCase::StartViaSwitch, {}, tau, r)[1] == doctest::Approx(-0.25));

  LocalRates g;
  g.alpha_before = g.alpha_after = 0.25;
  g.beta_before = 0.0;
  g.beta_after = 1.3;
  g.nonempty_before = g.nonempty_after = true;
  CHECK(classify_case(Cause::LightSwitch, g) == DerivCase::GreenInNep);
  const SparseVec x = state_derivative_update(DerivCase::GreenInNep, SparseVec::unit(1, -0.25),
                                              tau, g);
  CHECK(x[1] == doctest::Approx(1.05));

  LocalRates e = g;
  e.nonempty_after = false;
  CHECK(classify_case(Cause::QueueEmptied, e) == DerivCase::Emptied);
  CHECK(state_derivative_update(DerivCase::Emptied, SparseVec::unit(0, 3.0), tau, e).empty());

  LocalRates ex = g;
  CHECK(classify_case(Cause::Exogenous, ex) == DerivCase::Unaffected);
  LocalRates start = g;
  start.nonempty_before = false;
  CHECK(classify_case(Cause::Exogenous, start) == DerivCase::StartExogenous);
  LocalRates ep = g;
  ep.nonempty_before = ep.nonempty_after = false;
  CHECK(classify_case(Cause::FrontArrival, ep) == DerivCase::InsideEp);

  // J inside a NEP with the queue on RED: x' -= alpha^+ tau'
  LocalRates j;
  j.alpha_before = 0.0;
  j.alpha_after = 1.3;
  j.nonempty_before = j.nonempty_after = true;
  CHECK(classify_case(Cause::FrontArrival, j) == DerivCase::FrontInNep);
  CHECK(state_derivative_update(DerivCase::FrontInNep, {}, tau, j)[1] == doctest::Approx(-1.3));
}

TEST_CASE("cost accumulator") {
  const ArteryModel m = fixtures::chain(1);
  NepRecord a;
  a.queue = 0;
  a.k = 1;
  a.xi = 0;
  a.eta = 10;
  a.deriv_snapshots = {SparseVec::unit(0, -0.25)};
  const CostAccumulator one = accumulate_cost_derivative(std::span(&a, 1), m, 100);
  CHECK(one.gradient[0] == doctest::Approx(-2.5 / 100));

  NepRecord b;
  b.queue = 1;
  b.k = 1;
  b.xi = 0;
  b.eta = 10;
  b.event_times = {6};
  b.x_samples = {1.0};
  b.deriv_snapshots = {SparseVec::unit(1, -0.25), SparseVec::unit(1, 1.05)};
  const CostAccumulator two = accumulate_cost_derivative(std::span(&b, 1), m, 1.0);
  CHECK(two.gradient[1] == doctest::Approx(2.7));
  CHECK(two.cost == doctest::Approx(b.area()));

  NepRecord z = b;
  z.deriv_snapshots = {SparseVec{}, SparseVec{}};
  const CostAccumulator zero = accumulate_cost_derivative(std::span(&z, 1), m, 1.0);
  for (double g : zero.gradient) CHECK(g == 0.0);

  NepRecord bad = a;
  bad.eta = -1;
  CHECK_THROWS_AS(accumulate_cost_derivative(std::span(&bad, 1), m, 1.0), DataError);
  NepRecord missing = b;
  missing.deriv_snapshots.pop_back();
  CHECK_THROWS_AS(accumulate_cost_derivative(std::span(&missing, 1), m, 1.0), DataError);
}

TEST_CASE("zero demand gives a zero gradient") {
  const Scenario s = fixtures::single(0.0, 0.0);
  const std::vector<std::uint64_t> seeds{1, 2};
  const GradientEstimate g = ipa_gradient(s, s.theta0, seeds, s.horizon);
  for (double v : g.mean) CHECK(v == 0.0);
  FdConfig fd;
  fd.seeds = seeds;
  for (const auto& e : finite_difference_all(s, s.theta0, fd)) CHECK(e.value == 0.0);
}

TEST_CASE("deterministic single intersection matches finite differences") {
  const Scenario s = parse_scenario(fixtures::scenario_path("det-n1.json"));
  const std::vector<std::uint64_t> seeds{1};
  const GradientEstimate g = ipa_gradient(s, s.theta0, seeds, s.horizon);
  FdConfig fd;
  fd.h = 1e-3;
  fd.seeds = seeds;
  for (int i = 0; i < 2; ++i) {
    const FdEstimate e = finite_difference_gradient(s, s.theta0, i, fd);
    CHECK(e.order_changes == 0);
    CHECK(std::abs(g.mean[static_cast<std::size_t>(i)] - e.value) <=
          1e-3 * std::max(std::abs(e.value), 1e-6));
  }
}

TEST_CASE("gradient step reduces the cost on the same seeds") {
  const Scenario s = fixtures::paper();
  const auto seeds = gradient_seeds(s.master_seed, 0, 5);
  const GradientEstimate g = ipa_gradient(s, s.theta0, seeds, s.horizon);
  const ThetaVector next = update_theta(s.theta0, g.mean, 1e-3, Normalization::GradientNorm);
  const MetricsReport after = evaluate_theta(s, next, seeds, s.horizon);
  CHECK(after.cost < g.mean_cost);
}

TEST_CASE("ipa errors name the failing seed") {
  // a long side RED against heavy demand fills the link
  DemandSpec d;
  d.side = {0.0, 0.0};
  d.artery = 1.2;
  d.constant = true;
  const Scenario s =
      make_scenario(fixtures::chain(2), d, ThetaVector({60, 5, 5, 120}, 5, 120), 2000);
  const std::vector<std::uint64_t> seeds{77};
  try {
    ipa_gradient(s, s.theta0, seeds, s.horizon);
    FAIL("expected a blocking violation");
  } catch (const PathFailure& e) {
    CHECK(e.seed() == 77);
  }
}

TEST_CASE("perturbation travels downstream and is wiped by an emptying") {
  const Scenario s = parse_scenario(fixtures::scenario_path("det-n2.json"));
  const auto hops = propagation_trace(s, s.theta0, 1, s.horizon, 0);
  REQUIRE_FALSE(hops.empty());
  const int down = s.model.queue_index(1, Flow::Artery);
  bool joined = false;
  bool reset_after_join = false;
  for (const auto& h : hops) {
    if (h.queue != down) continue;
    if (h.kind == PropagationHop::Kind::Join) joined = true;
    if (h.kind == PropagationHop::Kind::Reset && joined) {
      reset_after_join = true;
      CHECK(h.x_prime_after == 0.0);
    }
  }
  CHECK(joined);
  CHECK(reset_after_join);
}

TEST_CASE("stochastic paths: ipa is a one-sided derivative off the tie lattice") {
  Scenario s = fixtures::paper();
  s.theta0 = ThetaVector({35.0137, 26.0291, 30.0453, 20.0179, 21.0327, 31.0411}, 5, 120);
  const double h = 1e-7;
  for (const std::uint64_t seed : validation_seeds(s.master_seed, 8)) {
    const PathGradient g = ipa_path_gradient(s, s.theta0, seed, s.horizon);
    const double c0 = run_sample_path(s, s.theta0, seed, s.horizon).metrics.cost;
    for (std::size_t i = 0; i < s.theta0.size(); ++i) {
      const double up = run_sample_path(s, s.theta0.shifted(i, h), seed, s.horizon).metrics.cost;
      const double down = run_sample_path(s, s.theta0.shifted(i, -h), seed, s.horizon).metrics.cost;
      const double right = (up - c0) / h;
      const double left = (c0 - down) / h;
      CHECK(std::min(std::abs(g.gradient[i] - right), std::abs(g.gradient[i] - left)) < 1e-4);
    }
  }
}
