#include <algorithm>
#include <vector>

#include "detail/candidates.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/simulation.hpp"

namespace greenwave {

using detail::Priority;
using detail::Rank;

namespace {

struct Candidate {
  double t;
  Rank rank;
  SimEvent event;
};

}  // namespace

SimEvent next_event(const SimState& state, const ThetaVector& theta, const ArteryModel& model) {
  const double now = state.t;
  std::vector<Candidate> cands;
  auto add = [&](double t, Rank rank, SimEvent ev) {
    if (!(t <= state.horizon)) return;
    ev.tau = std::max(now, t);
    cands.push_back({t, rank, ev});
  };

  for (int n = 0; n < model.intersections(); ++n) {
    const auto& u = state.u[static_cast<std::size_t>(n)];
    if (u[0] + u[1] != 1) throw InvalidStateError("signals must satisfy u^0 + u^1 = 1");
    const int g = u[0] == 1 ? 0 : 1;
    const double t =
        now + std::max(0.0, theta.green(n, g) - state.z[static_cast<std::size_t>(n)][static_cast<std::size_t>(g)]);
    add(t, Rank{Priority::Switch, n, g, n},
        SimEvent{EventKind::ZHitTheta, n, g, detail::phase_flow(g), 0, 0.0});
  }

  for (int q = 0; q < model.queue_count(); ++q) {
    const auto i = static_cast<std::size_t>(q);
    if (!state.nonempty[i]) continue;
    const QueueId id = model.queue(q);
    const double t = detail::empty_time(now, state.x[i], state.alpha[i] - state.beta[i]);
    add(t, Rank{Priority::Empty, id.n, detail::sub_order(id.flow), q},
        SimEvent{EventKind::XDown0, id.n, id.phase(), id.flow, 0, 0.0});
  }

  std::vector<bool> seen(model.links().size(), false);
  for (const auto& fs : state.fronts) {
    const auto li = static_cast<std::size_t>(fs.link);
    if (seen[li]) continue;  // only the oldest front of a link can arrive next
    seen[li] = true;
    const LinkSpec& link = model.links()[li];
    const auto d = static_cast<std::size_t>(link.downstream_queue);
    const double xdot = state.nonempty[d] ? state.alpha[d] - state.beta[d] : 0.0;
    const double t = detail::arrival_time(now, fs.front.emitted, link, model.vehicle_length(),
                                          state.x[d], xdot);
    const QueueId down = model.queue(link.downstream_queue);
    const QueueId up = model.queue(link.upstream_queue);
    add(t, Rank{detail::arrival_priority(fs.front.kind), down.n, detail::sub_order(down.flow), fs.link},
        SimEvent{detail::arrival_kind(fs.front.kind), up.n, 0, up.flow, fs.front.burst, 0.0});
  }

  for (int q = 0; q < model.queue_count(); ++q) {
    const auto i = static_cast<std::size_t>(q);
    const double t = state.next_arrival_switch[i];
    if (t == kInfinity) continue;
    const QueueId id = model.queue(q);
    add(t, Rank{Priority::Exogenous, id.n, detail::sub_order(id.flow), q},
        SimEvent{state.alpha[i] == 0.0 ? EventKind::AlphaUp0 : EventKind::AlphaDown0, id.n,
                 id.phase(), id.flow, 0, 0.0});
  }

  if (state.next_perturbation_queue >= 0) {
    const QueueId id = model.queue(state.next_perturbation_queue);
    add(state.next_perturbation, Rank{Priority::Perturbation, id.n, detail::sub_order(id.flow), 0},
        SimEvent{EventKind::RateChange, id.n, id.phase(), id.flow, 0, 0.0});
  }

  Candidate best{state.horizon, Rank{Priority::Horizon, 0, 0, 0},
                 SimEvent{EventKind::Horizon, -1, -1, Flow::Artery, 0, std::max(now, state.horizon)}};
  if (!cands.empty()) {
    const auto first = std::min_element(cands.begin(), cands.end(),
                                        [](const auto& a, const auto& b) { return a.t < b.t; });
    const double t0 = first->t;
    const Candidate* pick = nullptr;
    for (const auto& c : cands) {
      if (c.t > t0 + kTieTolerance) continue;
      if (!pick || c.rank < pick->rank) pick = &c;
    }
    if (pick->t <= state.horizon) best = *pick;
  }
  return best.event;
}

}  // namespace greenwave
