#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/optimizer.hpp"

using namespace greenwave;

TEST_CASE("update_theta") {
  const ThetaVector t({35}, 5, 120);
  CHECK(update_theta(t, std::vector<double>{2}, 1, Normalization::None)[0] == 33);
  CHECK(update_theta(ThetaVector({6}, 5, 120), std::vector<double>{5}, 1, Normalization::None)[0] ==
        5);
  const ThetaVector four({35, 26, 30, 20}, 5, 120);
  const ThetaVector same = update_theta(four, std::vector<double>(4, 0.0), 3, Normalization::GradientNorm);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same[i] == four[i]);
  // normalized: the step has length rho
  const ThetaVector n = update_theta(four, std::vector<double>{3, 4, 0, 0}, 5, Normalization::GradientNorm);
  CHECK(n[0] == doctest::Approx(32));
  CHECK(n[1] == doctest::Approx(22));
  CHECK_THROWS_AS(update_theta(t, std::vector<double>{std::nan("")}, 1, Normalization::None),
                  DomainError);
}

TEST_CASE("step schedule") {
  OptimizerConfig c;
  CHECK(c.step(1) == doctest::Approx(5.0));
  CHECK(c.step(4) == doctest::Approx(5.0 / std::pow(4.0, 0.6)));
  c.iterations = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("online update count") {
  CHECK(online_update_count(43000, 1500) == 28);
  CHECK(online_update_count(2000, 2000) == 1);
  CHECK(online_update_count(2000, 5000) == 1);
}

TEST_CASE("zero demand leaves theta unchanged") {
  Scenario s = fixtures::single(0.0, 0.0);
  OptimizerConfig c;
  c.replications = 2;
  c.evaluation_replications = 2;
  const OptimizationLog log = batch_optimize(s, s.theta0, c);
  CHECK(log.rows.size() == 21);
  for (std::size_t i = 0; i < s.theta0.size(); ++i) CHECK(log.final_theta[i] == s.theta0[i]);
}

TEST_CASE("batch optimization is reproducible and stays in bounds") {
  const Scenario s = fixtures::paper();
  OptimizerConfig c = s.optimizer;
  c.iterations = 4;
  c.replications = 3;
  c.evaluation_replications = 3;
  const OptimizationLog a = batch_optimize(s, s.theta0, c);
  const OptimizationLog b = batch_optimize(s, s.theta0, c);
  REQUIRE(a.rows.size() == 5);
  CHECK(a.final_theta == b.final_theta);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].metrics.cost == b.rows[i].metrics.cost);
    for (double th : a.rows[i].theta) CHECK((th >= 5.0 && th <= 120.0));
  }
  CHECK(a.rows.back().gradient.empty());
  CHECK(a.rows.front().theta == std::vector<double>(s.theta0.values().begin(), s.theta0.values().end()));
}

TEST_CASE("online run with one window equals one batch replication") {
  Scenario s = fixtures::paper();
  OptimizerConfig c = s.optimizer;
  c.iterations = 1;
  c.replications = 1;
  c.window = s.horizon;
  const OptimizationLog online = online_optimize(s, s.theta0, c, s.horizon);
  REQUIRE(online.rows.size() == 1);
  const auto seeds = gradient_seeds(s.master_seed, 0, 1);
  const GradientEstimate g = ipa_gradient(s, s.theta0, seeds, s.horizon);
  const ThetaVector expected = update_theta(s.theta0, g.mean, c.step(1), c.normalization);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(online.rows[0].gradient[i] == doctest::Approx(g.mean[i]).epsilon(1e-12));
    CHECK(online.final_theta[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("online log length") {
  Scenario s = fixtures::paper();
  OptimizerConfig c = s.optimizer;
  const OptimizationLog log = online_optimize(s, s.theta0, c, 43000);
  CHECK(log.rows.size() == 28);
  CHECK(log.rows.back().t_end == doctest::Approx(28 * 1500.0));
}
