#include "greenwave/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "greenwave/csv.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/parallel.hpp"
#include "greenwave/rng.hpp"

namespace greenwave {

std::string_view to_string(Normalization n) {
  return n == Normalization::None ? "none" : "gradient-norm";
}

double OptimizerConfig::step(int l) const { return rho0 / std::pow(static_cast<double>(l), decay); }

void OptimizerConfig::validate() const {
  if (!(rho0 > 0.0)) throw ScenarioError("rho0", "rho0 > 0 violated");
  if (!(decay >= 0.0)) throw ScenarioError("decay", "decay >= 0 violated");
  if (iterations < 1) throw ScenarioError("iterations", "iterations >= 1 violated");
  if (replications < 1) throw ScenarioError("replications", "replications >= 1 violated");
  if (evaluation_replications < 1)
    throw ScenarioError("evaluationReplications", "evaluation replications >= 1 violated");
  if (!(window > 0.0)) throw ScenarioError("window", "window > 0 violated");
  if (!(online_horizon > 0.0)) throw ScenarioError("onlineHorizon", "online horizon > 0 violated");
}

ThetaVector update_theta(const ThetaVector& theta, std::span<const double> gradient, double rho,
                         Normalization normalization) {
  if (gradient.size() != theta.size()) throw DomainError("gradient size does not match theta");
  double norm2 = 0.0;
  for (double g : gradient) {
    if (!std::isfinite(g)) throw DomainError("non-finite gradient component");
    norm2 += g * g;
  }
  double scale = rho;
  if (normalization == Normalization::GradientNorm) {
    if (norm2 == 0.0) return theta;
    scale = rho / std::sqrt(norm2);
  }
  ThetaVector out = theta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = theta[i] - scale * gradient[i];
  out.clamp();
  return out;
}

std::vector<std::uint64_t> gradient_seeds(std::uint64_t master, int iteration, int replications) {
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < replications; ++r)
    seeds.push_back(derive_seed(master, {tag(StreamTag::Gradient),
                                         static_cast<std::uint64_t>(iteration),
                                         static_cast<std::uint64_t>(r)}));
  return seeds;
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int replications) {
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < replications; ++r)
    seeds.push_back(
        derive_seed(master, {tag(StreamTag::Evaluation), static_cast<std::uint64_t>(r)}));
  return seeds;
}

namespace {

void add_optional(std::optional<double>& sum, int& count, const std::optional<double>& v) {
  if (!v) return;
  sum = sum.value_or(0.0) + *v;
  ++count;
}

void divide(std::optional<double>& v, int count) {
  if (v) *v /= count;
}

}  // namespace

MetricsReport evaluate_theta(const Scenario& scenario, const ThetaVector& theta,
                             std::span<const std::uint64_t> seeds, double horizon) {
  std::vector<MetricsReport> reports(seeds.size());
  SimOptions options;
  options.record_events = false;
  options.record_neps = false;
  parallel_for(seeds.size(), [&](std::size_t r) {
    try {
      reports[r] = run_sample_path(scenario, theta, seeds[r], horizon, options).metrics;
    } catch (const PathFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw PathFailure(seeds[r], e.what());
    }
  });
  MetricsReport mean;
  int counts[5] = {0, 0, 0, 0, 0};
  mean.queue_mean.assign(static_cast<std::size_t>(scenario.model.queue_count()), 0.0);
  const double n = static_cast<double>(seeds.size());
  for (const auto& m : reports) {
    mean.cost += m.cost / n;
    mean.mean_queue_total += m.mean_queue_total / n;
    for (std::size_t q = 0; q < mean.queue_mean.size(); ++q) mean.queue_mean[q] += m.queue_mean[q] / n;
    add_optional(mean.wait_artery, counts[0], m.wait_artery);
    add_optional(mean.wait_side, counts[1], m.wait_side);
    add_optional(mean.wait_reverse, counts[2], m.wait_reverse);
    add_optional(mean.stop_ratio_artery, counts[3], m.stop_ratio_artery);
    add_optional(mean.stop_ratio_reverse, counts[4], m.stop_ratio_reverse);
  }
  divide(mean.wait_artery, counts[0]);
  divide(mean.wait_side, counts[1]);
  divide(mean.wait_reverse, counts[2]);
  divide(mean.stop_ratio_artery, counts[3]);
  divide(mean.stop_ratio_reverse, counts[4]);
  return mean;
}

OptimizationLog batch_optimize(const Scenario& scenario, const ThetaVector& theta0,
                               const OptimizerConfig& config) {
  config.validate();
  const auto eval = evaluation_seeds(scenario.master_seed, config.evaluation_replications);
  OptimizationLog log;
  log.mode = "batch";
  ThetaVector theta = theta0;
  for (int l = 0; l <= config.iterations; ++l) {
    IterationRecord row;
    row.iteration = l;
    row.t_end = scenario.horizon;
    row.theta.assign(theta.values().begin(), theta.values().end());
    row.metrics = evaluate_theta(scenario, theta, eval, scenario.horizon);
    if (l < config.iterations) {
      const auto seeds = gradient_seeds(scenario.master_seed, l, config.replications);
      const GradientEstimate g = ipa_gradient(scenario, theta, seeds, scenario.horizon);
      row.gradient = g.mean;
      row.gradient_cost = g.mean_cost;
      row.step = config.step(l + 1);
      theta = update_theta(theta, g.mean, row.step, config.normalization);
    }
    log.rows.push_back(std::move(row));
  }
  log.final_theta.assign(theta.values().begin(), theta.values().end());
  return log;
}

int online_update_count(double total, double window) {
  if (!(total > 0.0) || !(window > 0.0)) throw DomainError("online horizon and window must be positive");
  return std::max(1, static_cast<int>(std::floor(total / window)));
}

OptimizationLog online_optimize(const Scenario& scenario, const ThetaVector& theta0,
                                const OptimizerConfig& config, double total) {
  config.validate();
  const int updates = online_update_count(total, config.window);
  const std::uint64_t seed = gradient_seeds(scenario.master_seed, 0, 1).front();

  SimOptions sim_options;
  sim_options.record_events = false;
  sim_options.record_neps = false;
  Simulation sim(scenario, theta0, seed, total, sim_options);
  IpaOptions ipa_options;
  ipa_options.rate_mode = scenario.rate_mode;
  ipa_options.rate_window = scenario.rate_window;
  ipa_options.record_snapshots = false;
  IpaEngine ipa(sim.model(), ipa_options);
  sim.add_observer(&ipa);

  OptimizationLog log;
  log.mode = "online";
  ThetaVector theta = theta0;
  Totals before = sim.totals();
  double t_begin = 0.0;
  for (int k = 1; k <= updates; ++k) {
    const double t_end = k == updates && updates * config.window > total
                             ? total
                             : std::min(total, k * config.window);
    try {
      if (t_end >= total) {
        sim.run();
      } else {
        sim.run_until(t_end);
      }
    } catch (const std::exception& e) {
      throw PathFailure(seed, e.what());
    }
    const Totals after = sim.totals();
    const double span = t_end - t_begin;
    IterationRecord row;
    row.iteration = k;
    row.t_begin = t_begin;
    row.t_end = t_end;
    row.theta.assign(theta.values().begin(), theta.values().end());
    row.metrics = compute_metrics(scenario.model, before, after);
    row.gradient_cost = row.metrics.cost;
    row.gradient = ipa.integrated_gradient(t_end);
    for (double& g : row.gradient) g /= span;
    row.step = config.step(k);
    theta = update_theta(theta, row.gradient, row.step, config.normalization);
    if (!sim.finished()) sim.set_theta(theta);
    ipa.reset(t_end);
    log.rows.push_back(std::move(row));
    before = after;
    t_begin = t_end;
  }
  log.final_theta.assign(theta.values().begin(), theta.values().end());
  return log;
}

void OptimizationLog::write_csv(std::ostream& out, const ArteryModel& model) const {
  std::vector<std::string> header{"iteration", "t_begin", "t_end"};
  for (int n = 1; n <= model.intersections(); ++n) {
    header.push_back("theta_" + std::to_string(n) + "_0");
    header.push_back("theta_" + std::to_string(n) + "_1");
  }
  for (const char* c : {"cost", "wait_artery", "wait_side", "wait_reverse", "stop_ratio_artery",
                        "stop_ratio_reverse", "gradient_cost", "grad_norm", "step"})
    header.emplace_back(c);
  for (int n = 1; n <= model.intersections(); ++n) {
    header.push_back("grad_" + std::to_string(n) + "_0");
    header.push_back("grad_" + std::to_string(n) + "_1");
  }
  write_csv_row(out, header);
  for (const auto& row : rows) {
    std::vector<std::string> cells{std::to_string(row.iteration), format_number(row.t_begin),
                                   format_number(row.t_end)};
    for (double v : row.theta) cells.push_back(format_number(v));
    const auto& m = row.metrics;
    cells.push_back(format_number(m.cost));
    cells.push_back(format_number(m.wait_artery));
    cells.push_back(format_number(m.wait_side));
    cells.push_back(format_number(m.wait_reverse));
    cells.push_back(format_number(m.stop_ratio_artery));
    cells.push_back(format_number(m.stop_ratio_reverse));
    const bool has_grad = !row.gradient.empty();
    double norm2 = 0.0;
    for (double g : row.gradient) norm2 += g * g;
    cells.push_back(has_grad ? format_number(row.gradient_cost) : "");
    cells.push_back(has_grad ? format_number(std::sqrt(norm2)) : "");
    cells.push_back(has_grad ? format_number(row.step) : "");
    for (std::size_t i = 0; i < row.theta.size(); ++i)
      cells.push_back(has_grad ? format_number(row.gradient[i]) : "");
    write_csv_row(out, cells);
  }
}

}  // namespace greenwave
