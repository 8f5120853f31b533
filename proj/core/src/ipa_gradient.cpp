#include <exception>

#include "greenwave/errors.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/parallel.hpp"

namespace greenwave {

PathGradient ipa_path_gradient(const Scenario& scenario, const ThetaVector& theta,
                               std::uint64_t seed, double horizon) {
  SimOptions sim_options;
  sim_options.record_events = false;
  Simulation sim(scenario, theta, seed, horizon, sim_options);
  IpaOptions options;
  options.rate_mode = scenario.rate_mode;
  options.rate_window = scenario.rate_window;
  IpaEngine ipa(sim.model(), options);
  sim.add_observer(&ipa);
  sim.run();

  PathGradient out;
  out.seed = seed;
  out.events = sim.processed_events();
  Trajectory tr = sim.take_trajectory();
  const CostAccumulator acc = accumulate_cost_derivative(tr.neps, scenario.model, horizon);
  out.cost = acc.cost;
  out.gradient = acc.gradient;
  Totals begin;
  begin.queues.assign(tr.totals.queues.size(), QueueTotals{});
  out.metrics = compute_metrics(scenario.model, begin, tr.totals);
  return out;
}

GradientEstimate ipa_gradient(const Scenario& scenario, const ThetaVector& theta,
                              std::span<const std::uint64_t> seeds, double horizon) {
  if (seeds.empty()) throw DataError("ipa_gradient needs at least one seed");
  GradientEstimate est;
  est.paths.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t r) {
    try {
      est.paths[r] = ipa_path_gradient(scenario, theta, seeds[r], horizon);
    } catch (const PathFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw PathFailure(seeds[r], e.what());
    }
  });
  est.mean.assign(static_cast<std::size_t>(scenario.model.parameter_count()), 0.0);
  const double scale = 1.0 / static_cast<double>(seeds.size());
  for (const auto& p : est.paths) {
    est.mean_cost += p.cost * scale;
    for (std::size_t i = 0; i < est.mean.size(); ++i) est.mean[i] += p.gradient[i] * scale;
  }
  return est;
}

}  // namespace greenwave
