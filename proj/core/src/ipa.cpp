#include "greenwave/ipa.hpp"

#include <cmath>
#include <sstream>

#include "greenwave/errors.hpp"

namespace greenwave {

namespace {

constexpr double kDegenerate = 1e-9;

}  // namespace

void DerivState::reset() {
  for (auto& x : x_prime) x.clear();
  for (auto& s : last_switch) s.clear();
  for (auto& link : fronts)
    for (auto& f : link) f.s_prime.clear();
}

SparseVec empty_time_derivative(const SparseVec& x_prime, double alpha, double beta) {
  const double xdot = alpha - beta;
  if (std::abs(xdot) < kDegenerate) {
    std::ostringstream os;
    os << "queue emptying with vanishing drain rate (alpha=" << alpha << ", h=" << beta << ")";
    throw DegenerateEventError(os.str());
  }
  return x_prime.scaled(-1.0 / xdot);
}

SparseVec switch_time_derivative(const SparseVec& last_switch, int parameter) {
  SparseVec tau = last_switch;
  tau.add(static_cast<std::uint32_t>(parameter), 1.0);
  return tau;
}

SparseVec arrival_time_derivative(const SparseVec& s_prime, const SparseVec& x_prime_down,
                                  double xdot_before, double vehicle_length, double speed) {
  const double denom = speed + vehicle_length * xdot_before;
  if (std::abs(denom) < kDegenerate)
    throw DegenerateEventError("front arrival with v + l*xdot = 0: queue tail moves at burst speed");
  SparseVec tau = s_prime;
  tau.add_scaled(x_prime_down, -vehicle_length / speed);
  tau.scale(speed / denom);
  return tau;
}

DerivCase classify_case(Cause cause, const LocalRates& r) {
  if (!r.nonempty_after) return r.nonempty_before ? DerivCase::Emptied : DerivCase::InsideEp;
  if (!r.nonempty_before) {
    switch (cause) {
      case Cause::LightSwitch:
        return DerivCase::StartViaSwitch;
      case Cause::FrontArrival:
        return DerivCase::StartViaFront;
      case Cause::QueueEmptied:
      case Cause::Exogenous:
        return DerivCase::StartExogenous;
    }
  }
  switch (cause) {
    case Cause::LightSwitch:
      return r.beta_after == 0.0 ? DerivCase::RedInNep : DerivCase::GreenInNep;
    case Cause::FrontArrival:
      return DerivCase::FrontInNep;
    case Cause::QueueEmptied:
    case Cause::Exogenous:
      break;
  }
  return DerivCase::Unaffected;
}

SparseVec state_derivative_update(DerivCase c, const SparseVec& x_prime, const SparseVec& tau_prime,
                                  const LocalRates& r) {
  switch (c) {
    case DerivCase::InsideEp:
    case DerivCase::Emptied:
    case DerivCase::StartExogenous:
      return {};
    case DerivCase::StartViaSwitch:
    case DerivCase::StartViaFront:
      // x'(tau^-) = 0 and xdot(tau^-) = 0 inside the EP.
      return tau_prime.scaled(-r.xdot_after());
    case DerivCase::RedInNep:
    case DerivCase::GreenInNep:
    case DerivCase::FrontInNep: {
      SparseVec out = x_prime;
      out.add_scaled(tau_prime, r.xdot_before() - r.xdot_after());
      return out;
    }
    case DerivCase::Unaffected:
      return x_prime;
  }
  throw DataError("state_derivative_update: unknown case");
}

CostAccumulator accumulate_cost_derivative(std::span<const NepRecord> neps,
                                           const ArteryModel& model, double horizon,
                                           bool breakdown) {
  if (!(horizon > 0.0)) throw DataError("cost accumulation needs T > 0");
  CostAccumulator acc;
  acc.gradient.assign(static_cast<std::size_t>(model.parameter_count()), 0.0);
  for (const auto& nep : neps) {
    const std::size_t p_count = nep.event_times.size();
    if (nep.eta < nep.xi || nep.x_samples.size() != p_count) {
      std::ostringstream os;
      os << "malformed NEP " << nep.k << " of queue " << nep.queue << " [" << nep.xi << ", "
         << nep.eta << "]";
      throw DataError(os.str());
    }
    if (nep.deriv_snapshots.size() != p_count + 1) {
      std::ostringstream os;
      os << "NEP " << nep.k << " of queue " << nep.queue << " has "
         << nep.deriv_snapshots.size() << " derivative snapshots for " << p_count
         << " interior events";
      throw DataError(os.str());
    }
    const double w = model.weight(nep.queue);
    SparseVec g;
    double t_prev = nep.xi;
    for (std::size_t p = 0; p <= p_count; ++p) {
      const double t_next = p < p_count ? nep.event_times[p] : nep.eta;
      if (t_next < t_prev) throw DataError("NEP event times out of order");
      g.add_scaled(nep.deriv_snapshots[p], t_next - t_prev);
      t_prev = t_next;
    }
    const double cost = w * nep.area() / horizon;
    acc.cost += cost;
    g.accumulate_into(acc.gradient, w / horizon);
    if (breakdown) acc.per_nep.push_back({nep.queue, nep.k, cost, g.scaled(w / horizon)});
  }
  return acc;
}

IpaEngine::IpaEngine(const ArteryModel& model, IpaOptions options)
    : model_(model), options_(options) {
  const auto nq = static_cast<std::size_t>(model.queue_count());
  state_.x_prime.resize(nq);
  state_.last_switch.resize(static_cast<std::size_t>(model.intersections()));
  state_.fronts.resize(model.links().size());
  counters_.assign(nq, ArrivalCounter(options.rate_window));
  nonempty_.assign(nq, false);
  integrated_since_.assign(nq, 0.0);
}

double IpaEngine::alpha_estimate(int q, double exact, double t) const {
  if (options_.rate_mode == RateMode::ExactFluid) return exact;
  return counters_[static_cast<std::size_t>(q)].estimate(t);
}

void IpaEngine::integrate_to(int q, double t) {
  const auto i = static_cast<std::size_t>(q);
  const auto& x = state_.x_prime[i];
  if (!x.empty()) integral_.add_scaled(x, model_.weight(q) * (t - integrated_since_[i]));
  integrated_since_[i] = t;
}

void IpaEngine::on_event(const EventContext& ctx) {
  ++events_;
  cause_ = ctx.cause;
  event_t_ = ctx.t;
  event_queue_ = ctx.queue;
  event_intersection_ = ctx.intersection;
  event_link_ = ctx.link;
  switch (ctx.cause) {
    case Cause::LightSwitch: {
      auto& last = state_.last_switch[static_cast<std::size_t>(ctx.intersection)];
      tau_ = switch_time_derivative(last, ArteryModel::parameter_index(ctx.intersection, ctx.ended_phase));
      last = tau_;
      event_kind_ = EventKind::G2R;
      break;
    }
    case Cause::FrontArrival: {
      auto& pending = state_.fronts[static_cast<std::size_t>(ctx.link)];
      if (pending.empty()) throw DataError("front arrival without a tracked departure breakpoint");
      FrontDerivative fd = std::move(pending.front());
      pending.pop_front();
      event_kind_ = fd.kind == FrontKind::BurstHead   ? EventKind::BurstJoin
                    : fd.kind == FrontKind::BurstTail ? EventKind::BurstJoinEnd
                                                      : EventKind::RateChange;
      if (fd.kind == FrontKind::Interior && options_.interior_fronts_exogenous) {
        tau_.clear();
        break;
      }
      const int q = ctx.queue;
      const double alpha = alpha_estimate(q, ctx.alpha, ctx.t);
      const double xdot = nonempty_[static_cast<std::size_t>(q)] ? alpha - ctx.beta : 0.0;
      const LinkSpec& link = model_.links()[static_cast<std::size_t>(ctx.link)];
      tau_ = arrival_time_derivative(fd.s_prime, state_.x_prime[static_cast<std::size_t>(q)], xdot,
                                     model_.vehicle_length(), link.speed);
      break;
    }
    case Cause::QueueEmptied: {
      event_kind_ = EventKind::NepEnd;
      if (ctx.beta == 0.0) {
        // A RED queue only empties when its drain ended exactly at the
        // switch; the order of the two is immaterial to the state.
        tau_.clear();
        ++degenerate_;
        break;
      }
      const double alpha = alpha_estimate(ctx.queue, ctx.alpha, ctx.t);
      tau_ = empty_time_derivative(state_.x_prime[static_cast<std::size_t>(ctx.queue)], alpha,
                                   ctx.beta);
      break;
    }
    case Cause::Exogenous:
      event_kind_ = EventKind::RateChange;
      tau_.clear();
      break;
  }
}

void IpaEngine::on_queue_change(const QueueChange& ch) {
  const int q = ch.queue;
  const auto i = static_cast<std::size_t>(q);
  integrate_to(q, ch.t);

  LocalRates r;
  r.alpha_before = alpha_estimate(q, ch.alpha_before, ch.t);
  if (options_.rate_mode == RateMode::ExactFluid ||
      (cause_ == Cause::FrontArrival && q == event_queue_)) {
    r.alpha_after = ch.alpha_after;
  } else {
    r.alpha_after = r.alpha_before;
  }
  r.beta_before = ch.beta_before;
  r.beta_after = ch.beta_after;
  r.nonempty_before = ch.nonempty_before;
  r.nonempty_after = ch.nonempty_after;

  const DerivCase c = classify_case(cause_, r);
  auto& x = state_.x_prime[i];
  if (options_.record_history) {
    DerivRecord rec;
    rec.t = ch.t;
    rec.kind = event_kind_;
    rec.cause = cause_;
    rec.queue = q;
    rec.intersection = event_intersection_;
    rec.link = event_link_;
    rec.tau_prime = tau_;
    rec.x_before = x;
    x = state_derivative_update(c, x, tau_, r);
    rec.x_after = x;
    rec.nonempty_after = ch.nonempty_after;
    history_.push_back(std::move(rec));
  } else if (c != DerivCase::Unaffected && c != DerivCase::InsideEp) {
    x = state_derivative_update(c, x, tau_, r);
  }

  counters_[i].record(ch.t, ch.alpha_after);
  nonempty_[i] = ch.nonempty_after;
  if (ch.nep && options_.record_snapshots) ch.nep->deriv_snapshots.push_back(x);
}

void IpaEngine::on_front_emitted(int link, const Front& front) {
  state_.fronts[static_cast<std::size_t>(link)].push_back({front.kind, front.burst, tau_});
}

void IpaEngine::on_finish(double t) {
  for (int q = 0; q < model_.queue_count(); ++q) integrate_to(q, t);
}

void IpaEngine::reset(double t) {
  state_.reset();
  tau_.clear();
  integral_.clear();
  reset_time_ = t;
  std::fill(integrated_since_.begin(), integrated_since_.end(), t);
}

std::vector<double> IpaEngine::integrated_gradient(double t) const {
  auto out = integral_.dense(static_cast<std::size_t>(model_.parameter_count()));
  for (int q = 0; q < model_.queue_count(); ++q) {
    const auto i = static_cast<std::size_t>(q);
    state_.x_prime[i].accumulate_into(out, model_.weight(q) * (t - integrated_since_[i]));
  }
  return out;
}

}  // namespace greenwave
