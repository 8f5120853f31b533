#include "greenwave/ipa.hpp"

namespace greenwave {

std::string_view to_string(PropagationHop::Kind kind) {
  switch (kind) {
    case PropagationHop::Kind::Join:
      return "join";
    case PropagationHop::Kind::PassThrough:
      return "pass-through";
    case PropagationHop::Kind::Reset:
      return "reset";
  }
  return "?";
}

std::vector<PropagationHop> propagation_trace(const std::vector<DerivRecord>& history,
                                              const ArteryModel& model, int parameter) {
  const auto i = static_cast<std::uint32_t>(parameter);
  std::vector<PropagationHop> hops;
  for (const auto& rec : history) {
    PropagationHop hop;
    hop.t = rec.t;
    hop.event = rec.kind;
    hop.queue = rec.queue;
    hop.x_prime_before = rec.x_before[i];
    hop.x_prime_after = rec.x_after[i];
    hop.tau_prime = rec.tau_prime[i];
    if (rec.cause == Cause::FrontArrival && hop.tau_prime != 0.0) {
      hop.kind = rec.nonempty_after ? PropagationHop::Kind::Join : PropagationHop::Kind::PassThrough;
      if (hop.kind == PropagationHop::Kind::PassThrough && model.outbound_link(rec.queue) < 0)
        continue;  // nothing downstream to carry it
      hops.push_back(hop);
    } else if (rec.cause == Cause::QueueEmptied && hop.x_prime_before != 0.0 &&
               model.inbound_link(rec.queue) >= 0) {
      // A queue fed by an upstream burst drained while still GREEN: it absorbs
      // the perturbation instead of passing it on at the next switch.
      hop.kind = PropagationHop::Kind::Reset;
      hop.breaks_green_wave = true;
      hops.push_back(hop);
    }
  }
  return hops;
}

std::vector<PropagationHop> propagation_trace(const Scenario& scenario, const ThetaVector& theta,
                                              std::uint64_t seed, double horizon, int parameter) {
  SimOptions sim_options;
  sim_options.record_events = false;
  sim_options.record_neps = false;
  Simulation sim(scenario, theta, seed, horizon, sim_options);
  IpaOptions options;
  options.rate_mode = scenario.rate_mode;
  options.rate_window = scenario.rate_window;
  options.record_snapshots = false;
  options.record_history = true;
  IpaEngine ipa(sim.model(), options);
  sim.add_observer(&ipa);
  sim.run();
  return propagation_trace(ipa.history(), scenario.model, parameter);
}

}  // namespace greenwave
