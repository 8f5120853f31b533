#include "greenwave/scenario.hpp"

#include <algorithm>

#include "greenwave/errors.hpp"

namespace greenwave {

std::string_view to_string(RateMode mode) {
  return mode == RateMode::ExactFluid ? "exact-fluid" : "windowed-estimate";
}

void Scenario::validate() const {
  model.validate();
  theta0.validate();
  if (theta0.size() != static_cast<std::size_t>(model.parameter_count()))
    throw ScenarioError("theta0", "expected one (artery, side) pair per intersection");
  if (!(horizon > 0.0)) throw ScenarioError("horizon", "T > 0 violated");
  if (!(rate_window > 0.0)) throw ScenarioError("rateWindow", "t_w > 0 violated");
  if (arrivals.size() != static_cast<std::size_t>(model.queue_count()))
    throw ScenarioError("arrivals", "arrival table does not match the queue layout");
  for (int q = 0; q < model.queue_count(); ++q) {
    const auto& a = arrivals[static_cast<std::size_t>(q)];
    const QueueId id = model.queue(q);
    const std::string where = "arrivals[n=" + std::to_string(id.n + 1) + "," +
                              std::string(to_string(id.flow)) + "]";
    if (model.is_exogenous(q)) {
      if (!a) throw ScenarioError(where, "exogenous queue has no arrival process");
      a->validate();
    } else if (a) {
      throw ScenarioError(where,
                          "non-exogenous artery queue must not have an arrival process "
                          "(it is fed by the upstream intersection)");
    }
  }
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    const auto& p = perturbations[i];
    const std::string where = "perturbations[" + std::to_string(i) + "]";
    if (p.queue < 0 || p.queue >= model.queue_count() || !model.is_exogenous(p.queue))
      throw ScenarioError(where, "perturbation must target an exogenous queue");
    // perturbations may also target the longer online run
    if (!(p.time >= 0.0 && p.time <= std::max(horizon, optimizer.online_horizon)))
      throw ScenarioError(where, "perturbation time within horizon violated");
    if (!(p.mean_rate >= 0.0)) throw ScenarioError(where, "rates >= 0 violated");
  }
}

Scenario make_scenario(ArteryModel model, const DemandSpec& demand, ThetaVector theta0,
                       double horizon, std::uint64_t master_seed) {
  Scenario s;
  s.model = std::move(model);
  s.theta0 = std::move(theta0);
  s.horizon = horizon;
  s.master_seed = master_seed;
  const int nq = s.model.queue_count();
  s.arrivals.assign(static_cast<std::size_t>(nq), std::nullopt);
  auto make = [&](double rate, int q) {
    const auto stream = static_cast<std::uint64_t>(q);
    return demand.constant ? ArrivalProcess::constant(rate, stream)
                           : ArrivalProcess::on_off(rate, demand.mean_on, demand.mean_off, stream);
  };
  for (int q = 0; q < nq; ++q) {
    if (!s.model.is_exogenous(q)) continue;
    const QueueId id = s.model.queue(q);
    double rate = 0.0;
    switch (id.flow) {
      case Flow::Side:
        rate = static_cast<std::size_t>(id.n) < demand.side.size()
                   ? demand.side[static_cast<std::size_t>(id.n)]
                   : 0.0;
        break;
      case Flow::Artery:
        rate = demand.artery;
        break;
      case Flow::Reverse:
        rate = demand.reverse;
        break;
    }
    s.arrivals[static_cast<std::size_t>(q)] = make(rate, q);
  }
  return s;
}

Scenario replicate_chain(const Scenario& base, int intersections) {
  const ArteryModel& bm = base.model;
  const int bn = bm.intersections();
  const double length = bn > 1 ? bm.link_length()[0] : 200.0;
  const double speed = bn > 1 ? bm.link_speed()[0] : 10.0;
  ArteryModel model(intersections,
                    std::vector<double>(static_cast<std::size_t>(intersections - 1), length),
                    std::vector<double>(static_cast<std::size_t>(intersections - 1), speed),
                    bm.vehicle_length(), bm.departure_rate(), bm.bidirectional());

  Scenario s;
  s.name = base.name + "-chain" + std::to_string(intersections);
  std::vector<double> theta;
  for (int n = 0; n < intersections; ++n) {
    theta.push_back(base.theta0.green(n % bn, 0));
    theta.push_back(base.theta0.green(n % bn, 1));
  }
  s.theta0 = ThetaVector(std::move(theta), base.theta0.lower(), base.theta0.upper());
  s.horizon = base.horizon;
  s.master_seed = base.master_seed;
  s.rate_mode = base.rate_mode;
  s.rate_window = base.rate_window;
  s.arrivals.assign(static_cast<std::size_t>(model.queue_count()), std::nullopt);
  for (int q = 0; q < model.queue_count(); ++q) {
    if (!model.is_exogenous(q)) continue;
    const QueueId id = model.queue(q);
    const int src_n = id.flow == Flow::Side ? id.n % bn : (id.flow == Flow::Artery ? 0 : bn - 1);
    ArrivalProcess p = *base.arrival(bm.queue_index(src_n, id.flow));
    p.stream = static_cast<std::uint64_t>(q);
    s.arrivals[static_cast<std::size_t>(q)] = p;
  }
  s.model = std::move(model);
  return s;
}

}  // namespace greenwave
