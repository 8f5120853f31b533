#include <doctest.h>

#include "fixtures.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/model.hpp"
#include "greenwave/rng.hpp"
#include "greenwave/sparse_vec.hpp"

using namespace greenwave;

TEST_CASE("control signal follows the phase clocks") {
  CHECK(control_signal({30, 0}, {30, 20}) == std::array<int, 2>{0, 1});
  CHECK(control_signal({12, 0}, {30, 20}) == std::array<int, 2>{1, 0});
  CHECK(control_signal({0, 20}, {30, 20}) == std::array<int, 2>{1, 0});
  CHECK(control_signal({0, 7}, {30, 20}) == std::array<int, 2>{0, 1});
  CHECK_THROWS_AS(control_signal({0, 0}, {30, 20}), InvalidStateError);
  CHECK_THROWS_AS(control_signal({3, 4}, {30, 20}), InvalidStateError);
}

TEST_CASE("departure rate") {
  CHECK(departure_rate(4.2, 1, 0.25, 1.3) == 1.3);
  CHECK(departure_rate(0.0, 1, 0.25, 1.3) == 0.25);
  CHECK(departure_rate(4.2, 0, 0.25, 1.3) == 0.0);
  CHECK(departure_rate(0.0, 0, 0.25, 1.3) == 0.0);
  CHECK_THROWS_AS(departure_rate(-1.0, 1, 0.25, 1.3), DomainError);
  CHECK_THROWS_AS(departure_rate(1.0, 1, -0.25, 1.3), DomainError);
}

TEST_CASE("transit delay") {
  CHECK(transit_delay(200, 10, 5, 10) == doctest::Approx(15.0));
  CHECK(transit_delay(200, 0, 5, 10) == doctest::Approx(20.0));
  CHECK_THROWS_AS(transit_delay(100, 20, 5, 10), BlockingViolation);
  CHECK_THROWS_AS(transit_delay(100, 25, 5, 10), BlockingViolation);
}

TEST_CASE("queue rate") {
  CHECK(queue_rate(0.25, 1.3) == doctest::Approx(-1.05));
  CHECK(queue_rate(0.25, 0.25) == 0.0);
  CHECK(queue_rate(0.25, 0.0) == 0.25);
}

TEST_CASE("queue layout") {
  const ArteryModel uni = fixtures::chain(3);
  CHECK(uni.queue_count() == 6);
  CHECK(uni.links().size() == 2);
  CHECK(uni.queue_index(1, Flow::Side) == 3);
  CHECK(uni.is_exogenous(uni.queue_index(0, Flow::Artery)));
  CHECK_FALSE(uni.is_exogenous(uni.queue_index(1, Flow::Artery)));
  CHECK(uni.is_exogenous(uni.queue_index(2, Flow::Side)));

  const ArteryModel bi = fixtures::chain(3, true);
  CHECK(bi.queue_count() == 9);
  CHECK(bi.links().size() == 4);
  CHECK(bi.is_exogenous(bi.queue_index(2, Flow::Reverse)));
  CHECK_FALSE(bi.is_exogenous(bi.queue_index(0, Flow::Reverse)));
  for (int q = 0; q < bi.queue_count(); ++q) {
    const QueueId id = bi.queue(q);
    CHECK(bi.queue_index(id.n, id.flow) == q);
  }
  CHECK(ArteryModel::parameter_index(2, 1) == 5);
}

TEST_CASE("model invariants") {
  CHECK_THROWS_AS(ArteryModel(0, {}, {}, 5, 1.3, false), ScenarioError);
  CHECK_THROWS_AS(ArteryModel(2, {-200}, {10}, 5, 1.3, false).validate(), ScenarioError);
  CHECK_THROWS_AS(ArteryModel(2, {200}, {0}, 5, 1.3, false).validate(), ScenarioError);
  CHECK_NOTHROW(fixtures::chain(4, true).validate());
}

TEST_CASE("theta vector") {
  ThetaVector t({35, 26, 30, 20}, 5, 120);
  CHECK(t.green(1, 0) == 30);
  CHECK(t.shifted(3, 0.5)[3] == 20.5);
  ThetaVector out({2, 200}, 5, 120);
  CHECK_FALSE(out.within_bounds());
  out.clamp();
  CHECK(out[0] == 5);
  CHECK(out[1] == 120);
}

TEST_CASE("sparse vector arithmetic") {
  SparseVec a = SparseVec::unit(3, 2.0);
  a.add(1, 1.0);
  a.add(3, -2.0);
  CHECK(a.size() == 1);
  CHECK(a[1] == 1.0);
  CHECK(a[3] == 0.0);
  SparseVec b = SparseVec::from_dense(std::vector<double>{0, 1, 0, 4});
  b.add_scaled(a, -1.0);
  CHECK(b.dense(4) == std::vector<double>{0, 0, 0, 4});
  CHECK(b.scaled(0.5).max_abs() == 2.0);
}

TEST_CASE("seed derivation is a pure function of its path") {
  const auto s = derive_seed(7, {tag(StreamTag::Gradient), 3, 4});
  CHECK(s == derive_seed(7, {tag(StreamTag::Gradient), 3, 4}));
  CHECK(s != derive_seed(7, {tag(StreamTag::Gradient), 3, 5}));
  CHECK(s != derive_seed(8, {tag(StreamTag::Gradient), 3, 4}));
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}
