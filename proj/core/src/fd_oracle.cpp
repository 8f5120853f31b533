#include "greenwave/fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "greenwave/errors.hpp"
#include "greenwave/parallel.hpp"
#include "greenwave/rng.hpp"
#include "greenwave/simulation.hpp"

namespace greenwave {

namespace {

struct Evaluation {
  double cost = 0.0;
  std::vector<SimEvent> events;
};

Evaluation evaluate(const Scenario& scenario, const ThetaVector& theta, std::uint64_t seed,
                    double horizon) {
  PathResult r = run_sample_path(scenario, theta, seed, horizon);
  return {r.metrics.cost, std::move(r.trajectory.events)};
}

bool same_order(const std::vector<SimEvent>& a, const std::vector<SimEvent>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!same_kind(a[k], b[k])) return false;
  return true;
}

}  // namespace

void FdConfig::validate() const {
  if (!(h > 0.0)) throw DomainError("finite difference step h must be positive");
  if (seeds.empty()) throw DomainError("finite difference needs at least one seed");
}

FdEstimate finite_difference_gradient(const Scenario& scenario, const ThetaVector& theta, int i,
                                      const FdConfig& config) {
  config.validate();
  const auto idx = static_cast<std::size_t>(i);
  if (idx >= theta.size()) throw DomainError("finite difference coordinate out of range");
  const double horizon = config.horizon > 0.0 ? config.horizon : scenario.horizon;
  const ThetaVector plus = theta.shifted(idx, config.h);
  const ThetaVector minus =
      config.scheme == FdScheme::Central ? theta.shifted(idx, -config.h) : theta;
  if (!plus.within_bounds() || !minus.within_bounds()) {
    std::ostringstream os;
    os << "theta[" << i << "] = " << theta[idx] << " +/- " << config.h
       << " leaves the parameter bounds";
    throw DomainError(os.str());
  }
  const double span = config.scheme == FdScheme::Central ? 2.0 * config.h : config.h;

  FdEstimate est;
  est.coordinate = i;
  est.per_seed.assign(config.seeds.size(), 0.0);
  std::vector<char> changed(config.seeds.size(), 0);
  parallel_for(config.seeds.size(), [&](std::size_t r) {
    const std::uint64_t seed = config.seeds[r];
    try {
      const Evaluation hi = evaluate(scenario, plus, seed, horizon);
      const Evaluation lo = evaluate(scenario, minus, seed, horizon);
      est.per_seed[r] = (hi.cost - lo.cost) / span;
      changed[r] = same_order(hi.events, lo.events) ? 0 : 1;
    } catch (const PathFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw PathFailure(seed, e.what());
    }
  });
  const double n = static_cast<double>(est.per_seed.size());
  est.value = std::accumulate(est.per_seed.begin(), est.per_seed.end(), 0.0) / n;
  if (est.per_seed.size() > 1) {
    double ss = 0.0;
    for (double v : est.per_seed) ss += (v - est.value) * (v - est.value);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  est.order_changes = static_cast<std::size_t>(std::count(changed.begin(), changed.end(), 1));
  return est;
}

std::vector<std::uint64_t> validation_seeds(std::uint64_t master, int count) {
  std::vector<std::uint64_t> out;
  for (int r = 0; r < count; ++r)
    out.push_back(derive_seed(master, {tag(StreamTag::Validation), static_cast<std::uint64_t>(r)}));
  return out;
}

std::vector<FdEstimate> finite_difference_all(const Scenario& scenario, const ThetaVector& theta,
                                              const FdConfig& config) {
  std::vector<FdEstimate> out;
  for (std::size_t i = 0; i < theta.size(); ++i)
    out.push_back(finite_difference_gradient(scenario, theta, static_cast<int>(i), config));
  return out;
}

}  // namespace greenwave
