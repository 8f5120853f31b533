#include <benchmark/benchmark.h>

#include <string>

#include "greenwave/ipa.hpp"
#include "greenwave/scenario_io.hpp"
#include "greenwave/simulation.hpp"

using namespace greenwave;

namespace {

Scenario chain(int n) {
  static const Scenario base =
      parse_scenario(std::string(GREENWAVE_SCENARIO_DIR) + "/paper-3x.json");
  return replicate_chain(base, n);
}

void BM_Simulate(benchmark::State& state) {
  const Scenario s = chain(static_cast<int>(state.range(0)));
  SimOptions options;
  options.record_events = false;
  std::uint64_t seed = 1;
  std::size_t events = 0;
  for (auto _ : state) {
    Simulation sim(s, s.theta0, seed++, s.horizon, options);
    sim.run();
    events += sim.processed_events();
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}

void BM_SimulateWithIpa(benchmark::State& state) {
  const Scenario s = chain(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  std::size_t events = 0;
  for (auto _ : state) {
    const PathGradient g = ipa_path_gradient(s, s.theta0, seed++, s.horizon);
    benchmark::DoNotOptimize(g.gradient.data());
    events += g.events;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}

}  // namespace

BENCHMARK(BM_Simulate)->Arg(3)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateWithIpa)->Arg(3)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
