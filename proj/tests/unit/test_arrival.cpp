#include <doctest.h>

#include <cmath>

#include "greenwave/arrival.hpp"
#include "greenwave/errors.hpp"

using namespace greenwave;

TEST_CASE("zero mean rate gives an empty path") {
  const RatePath p = sample_arrival_path(ArrivalProcess::on_off(0.0, 10, 10), 1000, 3);
  for (const auto& b : p) CHECK(b.rate == 0.0);
  CHECK(p.size() <= 1);
}

TEST_CASE("on/off empirical mean rate") {
  // onRate 0.5 with equal holding means gives 0.25
  const ArrivalProcess proc = ArrivalProcess::on_off(0.25, 60, 60);
  CHECK(proc.on_rate == doctest::Approx(0.5));
  const double T = 1e5;
  const RatePath p = sample_arrival_path(proc, T, 42);
  CHECK(std::abs(integrate(p, 0, T) / T - 0.25) < 0.25 * 0.05);
}

TEST_CASE("arrival paths are deterministic per seed") {
  const ArrivalProcess proc = ArrivalProcess::on_off(0.1, 10, 10);
  const RatePath a = sample_arrival_path(proc, 2000, 9);
  const RatePath b = sample_arrival_path(proc, 2000, 9);
  const RatePath c = sample_arrival_path(proc, 2000, 10);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].rate == b[i].rate);
  }
  CHECK((a.size() != c.size() || a[1].t != c[1].t));
}

TEST_CASE("rescaling the mean keeps the switching sequence") {
  ArrivalStream s1(ArrivalProcess::on_off(0.1, 10, 10), 5);
  ArrivalStream s2(ArrivalProcess::on_off(0.3, 10, 10), 5);
  for (int i = 0; i < 50; ++i) {
    CHECK(s1.next_switch() == s2.next_switch());
    CHECK(s2.rate() == doctest::Approx(3.0 * s1.rate()));
    s1.advance();
    s2.advance();
  }
}

TEST_CASE("constant stream") {
  const RatePath p = sample_arrival_path(ArrivalProcess::constant(0.2), 500, 1);
  CHECK(rate_at(p, 0) == 0.2);
  CHECK(rate_at(p, 499) == 0.2);
  CHECK(integrate(p, 100, 200) == doctest::Approx(20.0));
}

TEST_CASE("invalid arrival processes") {
  CHECK_THROWS(ArrivalProcess::on_off(-0.1, 10, 10).validate());
  CHECK_THROWS(ArrivalProcess::on_off(0.1, 0, 10).validate());
}

TEST_CASE("windowed arrival-rate estimate") {
  // 5 vehicles in a 20 s window
  const RatePath five{{0, 0}, {100, 0.5}, {110, 0}};
  CHECK(estimate_arrival_rate(five, 115, 20) == doctest::Approx(0.25));
  CHECK(estimate_arrival_rate(RatePath{{0, 0}}, 50, 20) == 0.0);
  CHECK(estimate_arrival_rate(RatePath{{0, 0.25}}, 80, 20) == 0.25);
  // window truncated at t = 0
  CHECK(estimate_arrival_rate(RatePath{{0, 0.25}}, 10, 20) == 0.25);

  ArrivalCounter counter(20);
  counter.record(0, 0.0);
  counter.record(100, 0.5);
  counter.record(110, 0.0);
  CHECK(counter.estimate(115) == doctest::Approx(0.25));
  CHECK(counter.estimate(200) == 0.0);
}
