#include "greenwave/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "greenwave/csv.hpp"
#include "greenwave/errors.hpp"
#include "greenwave/rng.hpp"

namespace greenwave {

std::string_view library_version() { return "0.1.0"; }

namespace {

std::string queue_label(const ArteryModel& model, int q) {
  const QueueId id = model.queue(q);
  return std::to_string(id.n + 1) + "_" + std::string(to_string(id.flow));
}

Totals zero_totals(const ArteryModel& model) {
  Totals t;
  t.queues.assign(static_cast<std::size_t>(model.queue_count()), QueueTotals{});
  return t;
}

std::optional<double> reduction_pct(const std::optional<double>& before,
                                    const std::optional<double>& after) {
  if (!before || !after || *before == 0.0) return std::nullopt;
  return 100.0 * (*before - *after) / *before;
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

}  // namespace

SimulateResult cmd_simulate(const Scenario& scenario, const ThetaVector& theta, std::uint64_t seed,
                            std::ostream* events_csv) {
  SimOptions options;
  options.record_events = events_csv != nullptr;
  Simulation sim(scenario, theta, seed, scenario.horizon, options);
  const ArteryModel& model = scenario.model;
  if (events_csv) {
    std::vector<std::string> header{"t", "kind", "n", "d", "flow", "m"};
    for (int q = 0; q < model.queue_count(); ++q) header.push_back("x_" + queue_label(model, q));
    write_csv_row(*events_csv, header);
    std::size_t written = 0;
    auto flush = [&] {
      const auto& log = sim.events();
      if (written == log.size()) return;
      const std::vector<double> x = sim.snapshot().x;
      for (; written < log.size(); ++written) {
        const SimEvent& e = log[written];
        std::vector<std::string> row{format_number(e.tau), std::string(to_string(e.kind)),
                                     e.n >= 0 ? std::to_string(e.n + 1) : "",
                                     e.d >= 0 ? std::to_string(e.d) : "",
                                     e.n >= 0 ? std::string(to_string(e.flow)) : "",
                                     e.m > 0 ? std::to_string(e.m) : ""};
        for (double v : x) row.push_back(format_number(v));
        write_csv_row(*events_csv, row);
      }
    };
    sim.peek();  // logs the events at t = 0
    flush();
    while (sim.step()) flush();
    flush();
  } else {
    sim.run();
  }
  SimulateResult out;
  out.events = sim.processed_events();
  Trajectory tr = sim.take_trajectory();
  out.neps = tr.neps.size();
  out.metrics = compute_metrics(model, zero_totals(model), tr.totals);
  return out;
}

void write_metrics_csv(std::ostream& out, const ArteryModel& model, const MetricsReport& m) {
  write_csv_row(out, {"metric", "value"});
  write_csv_row(out, {"cost", format_number(m.cost)});
  write_csv_row(out, {"mean_queue_total", format_number(m.mean_queue_total)});
  write_csv_row(out, {"wait_artery", format_number(m.wait_artery)});
  write_csv_row(out, {"wait_side", format_number(m.wait_side)});
  write_csv_row(out, {"wait_reverse", format_number(m.wait_reverse)});
  write_csv_row(out, {"stop_ratio_artery", format_number(m.stop_ratio_artery)});
  write_csv_row(out, {"stop_ratio_reverse", format_number(m.stop_ratio_reverse)});
  for (int q = 0; q < model.queue_count(); ++q)
    write_csv_row(out, {"mean_queue_" + queue_label(model, q),
                        format_number(m.queue_mean[static_cast<std::size_t>(q)])});
}

Scenario with_reverse_demand(const Scenario& scenario, double mean_rate) {
  if (!scenario.model.bidirectional())
    throw ScenarioError("model.bidirectional", "reverse demand needs a bidirectional model");
  Scenario s = scenario;
  const int q = s.model.queue_index(s.model.intersections() - 1, Flow::Reverse);
  ArrivalProcess p = *s.arrival(q);
  p = p.is_constant() ? ArrivalProcess::constant(mean_rate, p.stream)
                      : ArrivalProcess::on_off(mean_rate, p.mean_on, p.mean_off, p.stream);
  s.arrivals[static_cast<std::size_t>(q)] = p;
  return s;
}

ExperimentReport cmd_optimize(const Scenario& scenario, const OptimizerConfig& config,
                              OptimizeMode mode) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.scenario = scenario.name;
  r.mode = mode;
  if (scenario.model.bidirectional()) {
    const int q = scenario.model.queue_index(scenario.model.intersections() - 1, Flow::Reverse);
    r.reverse_demand = scenario.arrival(q)->mean_rate;
  }
  if (mode == OptimizeMode::Batch) {
    r.log = batch_optimize(scenario, scenario.theta0, config);
    const MetricsReport& a = r.log.rows.front().metrics;
    const MetricsReport& b = r.log.rows.back().metrics;
    r.initial_cost = a.cost;
    r.final_cost = b.cost;
    r.initial_stop_ratio = a.stop_ratio_artery;
    r.final_stop_ratio = b.stop_ratio_artery;
    r.initial_stop_ratio_reverse = a.stop_ratio_reverse;
    r.final_stop_ratio_reverse = b.stop_ratio_reverse;
  } else {
    r.log = online_optimize(scenario, scenario.theta0, config, config.online_horizon);
    const auto& rows = r.log.rows;
    const std::size_t quarter = std::max<std::size_t>(1, rows.size() / 4);
    const auto tail = rows.end() - static_cast<std::ptrdiff_t>(quarter);
    r.initial_cost = rows.front().metrics.cost;
    r.initial_stop_ratio = rows.front().metrics.stop_ratio_artery;
    r.initial_stop_ratio_reverse = rows.front().metrics.stop_ratio_reverse;
    double cost = 0.0;
    std::optional<double> stop;
    std::optional<double> stop_rev;
    for (auto it = tail; it != rows.end(); ++it) {
      cost += it->metrics.cost / static_cast<double>(quarter);
      if (it->metrics.stop_ratio_artery)
        stop = stop.value_or(0.0) + *it->metrics.stop_ratio_artery / static_cast<double>(quarter);
      if (it->metrics.stop_ratio_reverse)
        stop_rev =
            stop_rev.value_or(0.0) + *it->metrics.stop_ratio_reverse / static_cast<double>(quarter);
    }
    r.final_cost = cost;
    r.final_stop_ratio = stop;
    r.final_stop_ratio_reverse = stop_rev;
  }
  r.cost_reduction_pct =
      r.initial_cost > 0.0 ? 100.0 * (r.initial_cost - r.final_cost) / r.initial_cost : 0.0;
  r.stop_ratio_reduction_pct = reduction_pct(r.initial_stop_ratio, r.final_stop_ratio);
  r.theta_opt = r.log.final_theta;
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  std::size_t theta_count = 0;
  for (const auto& r : reports) theta_count = std::max(theta_count, r.theta_opt.size());
  std::vector<std::string> header{"scenario",
                                  "mode",
                                  "reverse_demand",
                                  "initial_cost",
                                  "final_cost",
                                  "cost_reduction_pct",
                                  "initial_stop_ratio",
                                  "final_stop_ratio",
                                  "stop_ratio_reduction_pct",
                                  "initial_stop_ratio_reverse",
                                  "final_stop_ratio_reverse"};
  for (std::size_t i = 0; i < theta_count; ++i)
    header.push_back("theta_opt_" + std::to_string(i / 2 + 1) + "_" + std::to_string(i % 2));
  write_csv_row(out, header);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.scenario,
                                 r.mode == OptimizeMode::Batch ? "batch" : "online",
                                 format_number(r.reverse_demand),
                                 format_number(r.initial_cost),
                                 format_number(r.final_cost),
                                 format_number(r.cost_reduction_pct),
                                 format_number(r.initial_stop_ratio),
                                 format_number(r.final_stop_ratio),
                                 format_number(r.stop_ratio_reduction_pct),
                                 format_number(r.initial_stop_ratio_reverse),
                                 format_number(r.final_stop_ratio_reverse)};
    for (std::size_t i = 0; i < theta_count; ++i)
      row.push_back(i < r.theta_opt.size() ? format_number(r.theta_opt[i]) : "");
    write_csv_row(out, row);
  }
}

ValidationReport cmd_validate(const Scenario& scenario, const ThetaVector& theta,
                              const FdConfig& config, double absolute_floor) {
  const double horizon = config.horizon > 0.0 ? config.horizon : scenario.horizon;
  const GradientEstimate ipa = ipa_gradient(scenario, theta, config.seeds, horizon);
  const std::vector<FdEstimate> fd = finite_difference_all(scenario, theta, config);
  ValidationReport report;
  const double n = static_cast<double>(config.seeds.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    ValidationRow row;
    row.coordinate = static_cast<int>(i);
    row.ipa = ipa.mean[i];
    if (ipa.paths.size() > 1) {
      double ss = 0.0;
      for (const auto& p : ipa.paths) ss += (p.gradient[i] - row.ipa) * (p.gradient[i] - row.ipa);
      row.ipa_std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    row.fd = fd[i].value;
    row.fd_std_error = fd[i].std_error;
    row.order_changes = fd[i].order_changes;
    row.sign_agrees = (row.ipa > 0.0) == (row.fd > 0.0) || (row.ipa == 0.0 && row.fd == 0.0);
    const double diff = std::abs(row.ipa - row.fd);
    row.relative_difference = diff / std::max(std::abs(row.fd), absolute_floor);
    row.fd_significant = std::abs(row.fd) > row.fd_std_error;
    if (row.sign_agrees) ++report.sign_agreements;
    report.max_relative_difference =
        std::max(report.max_relative_difference, row.relative_difference);
    report.rows.push_back(row);
  }
  return report;
}

void write_validation_csv(std::ostream& out, const ValidationReport& report) {
  write_csv_row(out, {"coordinate", "n", "d", "ipa", "ipa_std_error", "fd", "fd_std_error",
                      "relative_difference", "sign_agrees", "order_changes"});
  for (const auto& r : report.rows) {
    write_csv_row(out, {std::to_string(r.coordinate), std::to_string(r.coordinate / 2 + 1),
                        std::to_string(r.coordinate % 2), format_number(r.ipa),
                        format_number(r.ipa_std_error), format_number(r.fd),
                        format_number(r.fd_std_error), format_number(r.relative_difference),
                        r.sign_agrees ? "1" : "0", std::to_string(r.order_changes)});
  }
}

std::optional<LinearFit> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return fit;
}

namespace {

// Captures every observer call so the estimator can be timed on its own.
class RecordingObserver : public PathObserver {
 public:
  struct Call {
    enum class Type : std::uint8_t { Event, Change, Front, Finish } type;
    EventContext ctx;
    QueueChange change;
    Front front;
    int link = -1;
    int nep_k = 0;
  };

  void on_event(const EventContext& ctx) override {
    Call c{Call::Type::Event, ctx, {}, {}, -1, 0};
    if (ctx.front) c.front = *ctx.front;
    c.ctx.front = nullptr;
    calls.push_back(c);
  }
  void on_queue_change(const QueueChange& ch) override {
    Call c{Call::Type::Change, {}, ch, {}, -1, ch.nep ? ch.nep->k : 0};
    c.change.nep = nullptr;
    calls.push_back(c);
  }
  void on_front_emitted(int link, const Front& f) override {
    calls.push_back(Call{Call::Type::Front, {}, {}, f, link, 0});
  }
  void on_finish(double t) override {
    Call c{Call::Type::Finish, {}, {}, {}, -1, 0};
    c.ctx.t = t;
    calls.push_back(c);
  }

  std::vector<Call> calls;
};

}  // namespace

ScalabilityReport cmd_scalability(const Scenario& templ, const std::vector<int>& sizes,
                                  std::uint64_t seed, int paths) {
  if (!std::is_sorted(sizes.begin(), sizes.end()))
    throw DomainError("scalability sizes must be sorted ascending");
  ScalabilityReport report;
  for (int n : sizes) {
    const Scenario s = replicate_chain(templ, n);
    ScalabilityRow row;
    row.intersections = n;
    for (int p = 0; p < paths; ++p) {
      const std::uint64_t path_seed =
          derive_seed(seed, {tag(StreamTag::Scalability), static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(p)});
      SimOptions options;
      options.record_events = false;

      double t0 = cpu_seconds();
      {
        Simulation bare(s, s.theta0, path_seed, s.horizon, options);
        bare.run();
        row.events += bare.processed_events();
      }
      row.sim_seconds += cpu_seconds() - t0;

      RecordingObserver recorder;
      Simulation sim(s, s.theta0, path_seed, s.horizon, options);
      sim.add_observer(&recorder);
      sim.run();
      Trajectory tr = sim.take_trajectory();
      std::map<std::pair<int, int>, NepRecord*> lookup;
      for (auto& nep : tr.neps) lookup[{nep.queue, nep.k}] = &nep;

      t0 = cpu_seconds();
      IpaOptions ipa_options;
      ipa_options.rate_mode = s.rate_mode;
      ipa_options.rate_window = s.rate_window;
      IpaEngine ipa(s.model, ipa_options);
      for (auto& c : recorder.calls) {
        switch (c.type) {
          case RecordingObserver::Call::Type::Event:
            c.ctx.front = &c.front;
            ipa.on_event(c.ctx);
            break;
          case RecordingObserver::Call::Type::Change:
            c.change.nep = c.nep_k > 0 ? lookup.at({c.change.queue, c.nep_k}) : nullptr;
            ipa.on_queue_change(c.change);
            break;
          case RecordingObserver::Call::Type::Front:
            ipa.on_front_emitted(c.link, c.front);
            break;
          case RecordingObserver::Call::Type::Finish:
            ipa.on_finish(c.ctx.t);
            break;
        }
      }
      const CostAccumulator acc = accumulate_cost_derivative(tr.neps, s.model, s.horizon);
      row.ipa_seconds += cpu_seconds() - t0;
      if (!std::isfinite(acc.cost)) throw DataError("non-finite cost in scalability run");
    }
    row.ipa_per_event_us =
        row.events > 0 ? 1e6 * row.ipa_seconds / static_cast<double>(row.events) : 0.0;
    report.rows.push_back(row);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  double lo = kInfinity;
  double hi = 0.0;
  for (const auto& r : report.rows) {
    xs.push_back(r.intersections);
    ys.push_back(r.ipa_seconds);
    lo = std::min(lo, r.ipa_per_event_us);
    hi = std::max(hi, r.ipa_per_event_us);
  }
  if (const auto fit = fit_line(xs, ys)) {
    report.slope = fit->slope;
    report.intercept = fit->intercept;
    report.r_squared = fit->r_squared;
    if (lo > 0.0) report.per_event_spread = hi / lo;
  }
  return report;
}

void write_scalability_csv(std::ostream& out, const ScalabilityReport& report) {
  write_csv_row(out, {"N", "events", "ipa_cpu_seconds", "sim_cpu_seconds", "ipa_us_per_event"});
  for (const auto& r : report.rows)
    write_csv_row(out, {std::to_string(r.intersections), std::to_string(r.events),
                        format_number(r.ipa_seconds), format_number(r.sim_seconds),
                        format_number(r.ipa_per_event_us)});
  write_csv_row(out, {"# fit_slope", format_number(report.slope)});
  write_csv_row(out, {"# fit_intercept", format_number(report.intercept)});
  write_csv_row(out, {"# fit_r_squared", format_number(report.r_squared)});
  write_csv_row(out, {"# per_event_spread", format_number(report.per_event_spread)});
}

void write_trace(std::ostream& out, const ArteryModel& model,
                 const std::vector<PropagationHop>& hops, int parameter) {
  out << "parameter " << parameter << " (theta_" << parameter / 2 + 1 << "^" << parameter % 2
      << ")\n";
  if (hops.empty()) {
    out << "no propagation\n";
    return;
  }
  for (const auto& h : hops) {
    out << format_number(h.t) << ' ' << to_string(h.kind) << ' ' << to_string(h.event)
        << " queue " << queue_label(model, h.queue) << " tau' " << format_number(h.tau_prime)
        << " x' " << format_number(h.x_prime_before) << " -> " << format_number(h.x_prime_after);
    if (h.breaks_green_wave) out << " breaks-green-wave";
    out << '\n';
  }
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::map<std::string, std::string>& flags, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  nlohmann::json doc;
  doc["tool"] = "greenwave";
  doc["version"] = std::string(library_version());
  doc["command"] = command;
  doc["seed"] = seed;
  doc["flags"] = flags;
  doc["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  out << doc.dump(2) << '\n';
}

}  // namespace greenwave
