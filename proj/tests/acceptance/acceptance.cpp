// Acceptance run: prints one PASS/FAIL line per criterion, exits nonzero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "greenwave/errors.hpp"
#include "greenwave/fd_oracle.hpp"
#include "greenwave/harness.hpp"
#include "greenwave/ipa.hpp"
#include "greenwave/optimizer.hpp"
#include "greenwave/rng.hpp"
#include "greenwave/scenario_io.hpp"
#include "greenwave/simulation.hpp"

using namespace greenwave;

namespace {

std::string path(const char* name) { return std::string(GREENWAVE_SCENARIO_DIR) + "/" + name; }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void run(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_seconds) {
    o.pass = false;
    o.detail += "; over time limit";
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

// 1

Outcome deterministic_oracle() {
  Outcome o{true, ""};
  double worst = 0.0;
  std::size_t order = 0;
  for (const char* name : {"det-n1.json", "det-n2.json", "det-n2-bidir.json"}) {
    const Scenario s = parse_scenario(path(name));
    FdConfig fd;
    fd.h = 1e-3;
    fd.seeds = {s.master_seed};
    const ValidationReport r = cmd_validate(s, s.theta0, fd, 1e-6);
    for (const auto& row : r.rows) {
      worst = std::max(worst, row.relative_difference);
      order += row.order_changes;
      if (row.relative_difference > 1e-3) o.pass = false;
    }
  }
  if (order > 0) o.pass = false;
  o.detail = "3 scenarios, max relative difference " + fmt("%.2e", worst) + ", order changes " +
             std::to_string(order);
  return o;
}

// 2

Outcome stochastic_oracle() {
  const Scenario s = parse_scenario(path("paper-3x.json"));
  FdConfig fd;
  fd.h = 0.5;
  fd.seeds = validation_seeds(s.master_seed, 50);
  const ValidationReport r = cmd_validate(s, s.theta0, fd);
  int close = 0;
  int significant = 0;
  std::size_t order = 0;
  std::string cells;
  for (const auto& row : r.rows) {
    order = std::max(order, row.order_changes);
    if (row.fd_significant) {
      ++significant;
      if (row.relative_difference <= 0.25) ++close;
    }
    cells += " [" + fmt("%.3g", row.ipa) + " vs " + fmt("%.3g", row.fd) + "]";
  }
  Outcome o;
  o.pass = r.sign_agreements >= 5 && close == significant;
  o.detail = "sign agreement " + std::to_string(r.sign_agreements) + "/6, within 25% on " +
             std::to_string(close) + "/" + std::to_string(significant) +
             " significant coordinates, event order changed on up to " + std::to_string(order) +
             "/50 seeds; ipa vs fd:" + cells;
  return o;
}

// 3

Outcome batch_descent() {
  const Scenario s = parse_scenario(path("paper-3x.json"));
  const ExperimentReport r = cmd_optimize(s, s.optimizer, OptimizeMode::Batch);
  const double stop = r.stop_ratio_reduction_pct.value_or(0.0);
  Outcome o;
  o.pass = r.cost_reduction_pct >= 50.0 && stop >= 10.0;
  o.detail = "cost " + fmt("%.3f", r.initial_cost) + " -> " + fmt("%.3f", r.final_cost) + " (" +
             fmt("%.1f", r.cost_reduction_pct) + "%), stop ratio reduction " + fmt("%.1f", stop) +
             "%";
  return o;
}

// 4

Scenario random_scenario(Rng& rng, int index) {
  const int n = 1 + static_cast<int>(rng.uniform() * 3.0);
  const bool bidir = n > 1 && rng.uniform() < 0.4;
  std::vector<double> length(static_cast<std::size_t>(n - 1));
  std::vector<double> speed(static_cast<std::size_t>(n - 1));
  for (auto& l : length) l = 150.0 + 250.0 * rng.uniform();
  for (auto& v : speed) v = 8.0 + 6.0 * rng.uniform();
  ArteryModel model(n, length, speed, 5.0, 1.3, bidir);
  DemandSpec d;
  for (int i = 0; i < n; ++i) d.side.push_back(0.25 * rng.uniform());
  d.artery = 0.3 * rng.uniform();
  d.reverse = 0.3 * rng.uniform();
  d.constant = rng.uniform() < 0.3;
  d.mean_on = 5.0 + 20.0 * rng.uniform();
  d.mean_off = 5.0 + 20.0 * rng.uniform();
  std::vector<double> theta(static_cast<std::size_t>(2 * n));
  for (auto& t : theta) t = 10.0 + 40.0 * rng.uniform();
  Scenario s = make_scenario(std::move(model), d, ThetaVector(theta, 5, 120),
                             300.0 + 400.0 * rng.uniform(),
                             derive_seed(99, {static_cast<std::uint64_t>(index)}));
  s.validate();
  return s;
}

struct Tally {
  std::map<std::string, int> violations;
  std::size_t events = 0;
  void fail(const std::string& what) { ++violations[what]; }
};

int link_of(const ArteryModel& m, const SimEvent& e) {
  const int up = m.queue_index(e.n, e.flow);
  return m.outbound_link(up);
}

bool is_arrival(EventKind k) {
  return k == EventKind::BurstJoin || k == EventKind::BurstJoinEnd || k == EventKind::RateChange;
}

void check_path(const Scenario& s, Tally& tally) {
  const ArteryModel& m = s.model;
  SimOptions so;
  IpaOptions io;
  io.record_history = true;
  Simulation sim(s, s.theta0, s.master_seed, s.horizon, so);
  IpaEngine ipa(m, io);
  sim.add_observer(&ipa);

  while (!sim.finished()) {
    const SimState st = sim.snapshot();
    for (const auto& u : st.u)
      if (u[0] + u[1] != 1) tally.fail("u0+u1=1");
    for (int q = 0; q < m.queue_count(); ++q) {
      const auto i = static_cast<std::size_t>(q);
      if (st.x[i] < 0.0) tally.fail("x>=0");
      if (!st.nonempty[i] && !ipa.state().x_prime[i].empty()) tally.fail("x'=0 in EP");
    }
    for (const auto& link : m.links()) {
      const double delta = transit_delay(link.length, st.x[static_cast<std::size_t>(link.downstream_queue)],
                                         m.vehicle_length(), link.speed);
      if (!(delta > 0.0 && delta <= link.length / link.speed)) tally.fail("Delta range");
    }
    const SimEvent next = sim.peek();
    if (is_arrival(next.kind) && next.m > 0) {
      const int l = link_of(m, next);
      for (const auto& f : st.fronts) {
        if (f.link != l) continue;
        const LinkSpec& link = m.links()[static_cast<std::size_t>(l)];
        const double delay = next.tau - f.front.emitted;
        if (!(delay > 0.0 && delay <= link.length / link.speed + 1e-9)) tally.fail("Delta range");
        break;
      }
    }
    sim.step();
  }
  tally.events += sim.processed_events();

  // burst FIFO: J(m), Je(m), J(m+1), ... on every link
  std::vector<int> joined(m.links().size(), 0);
  std::vector<int> ended(m.links().size(), 0);
  for (const auto& e : sim.events()) {
    if (e.kind != EventKind::BurstJoin && e.kind != EventKind::BurstJoinEnd) continue;
    const auto l = static_cast<std::size_t>(link_of(m, e));
    if (e.kind == EventKind::BurstJoin) {
      if (e.m != joined[l] + 1 || ended[l] != joined[l]) tally.fail("burst FIFO");
      joined[l] = e.m;
    } else {
      if (e.m != joined[l] || ended[l] != e.m - 1) tally.fail("burst FIFO");
      ended[l] = e.m;
    }
  }

  for (const auto& rec : ipa.history()) {
    if (rec.cause == Cause::Exogenous && !rec.tau_prime.empty()) tally.fail("tau'=0 exogenous");
    if (rec.cause == Cause::QueueEmptied && !rec.nonempty_after && !rec.x_after.empty())
      tally.fail("x'=0 after E");
    else if (!rec.nonempty_after && !rec.x_after.empty())
      tally.fail("x'=0 in EP");
  }

  const Totals t = sim.totals();
  for (const auto& q : t.queues) {
    const double scale = std::max(1.0, q.arrived);
    if (std::abs(q.arrived - q.departed - q.x) > 1e-9 * scale) tally.fail("conservation");
  }
  for (const auto& l : t.links) {
    const double scale = std::max(1.0, l.discharged);
    if (std::abs(l.discharged - l.joined - l.in_transit) > 1e-9 * scale) tally.fail("conservation");
  }

  // determinism
  const PathGradient a = ipa_path_gradient(s, s.theta0, s.master_seed, s.horizon);
  const PathGradient b = ipa_path_gradient(s, s.theta0, s.master_seed, s.horizon);
  const PathResult pa = run_sample_path(s, s.theta0, s.master_seed, s.horizon);
  if (a.gradient != b.gradient || a.cost != b.cost || pa.trajectory.events != sim.events())
    tally.fail("determinism");
}

Outcome invariant_suite() {
  Rng rng(2024);
  Tally tally;
  int checked = 0;
  int attempts = 0;
  std::map<std::string, int> preconditions;
  while (checked < 1000) {
    ++attempts;
    const Scenario s = random_scenario(rng, attempts);
    try {
      check_path(s, tally);
      ++checked;
    } catch (const BlockingViolation&) {
      ++preconditions["blocking"];
    } catch (const DegenerateEventError&) {
      ++preconditions["degenerate"];
    }
  }
  Outcome o;
  o.pass = tally.violations.empty();
  o.detail = std::to_string(checked) + " scenarios, " + std::to_string(tally.events) + " events";
  for (const auto& [what, count] : preconditions)
    o.detail += ", " + std::to_string(count) + " discarded (" + what + ")";
  for (const auto& [what, count] : tally.violations)
    o.detail += ", " + what + " violated " + std::to_string(count) + "x";
  if (o.pass) o.detail += ", no violations";
  return o;
}

// 5

Outcome scalability() {
  const Scenario s = parse_scenario(path("paper-3x.json"));
  const ScalabilityReport r = cmd_scalability(s, {3, 5, 10, 20}, s.master_seed, 10);
  Outcome o;
  const double r2 = r.r_squared.value_or(0.0);
  const double spread = r.per_event_spread.value_or(kInfinity);
  o.pass = r2 >= 0.9 && spread <= 2.0;
  o.detail = "R^2 " + fmt("%.4f", r2) + ", per-event spread " + fmt("%.2f", spread);
  return o;
}

// 6

double mean_cost(const OptimizationLog& log, std::size_t from, std::size_t to) {
  double sum = 0.0;
  for (std::size_t i = from; i < to; ++i) sum += log.rows[i].metrics.cost;
  return sum / static_cast<double>(to - from);
}

Outcome online_adaptivity() {
  const Scenario s = parse_scenario(path("paper-3x.json"));
  OptimizerConfig c = s.optimizer;
  c.online_horizon = 43000;
  c.window = 1500;
  const ExperimentReport online = cmd_optimize(s, c, OptimizeMode::Online);
  const bool online_ok = online.cost_reduction_pct >= 30.0;

  const Scenario p = parse_scenario(path("adaptivity-3x.json"));
  const OptimizationLog log = online_optimize(p, p.theta0, p.optimizer, p.optimizer.online_horizon);
  // windows are 1500 s: 10 before the perturbation, 10 during it
  const std::size_t rows = log.rows.size();
  const double before = mean_cost(log, 7, 10);
  const double during = mean_cost(log, 10, 20);
  const double end = mean_cost(log, rows - 3, rows);
  const bool rises = during > before;
  const bool returns = std::abs(end - before) <= 0.25 * before;

  Outcome o;
  o.pass = online_ok && rises && returns;
  o.detail = "online " + std::to_string(online.log.rows.size()) + " windows, final quartile " +
             fmt("%.1f", online.cost_reduction_pct) + "% below first window; perturbed run " +
             fmt("%.2f", before) + " before, " + fmt("%.2f", during) + " during, " +
             fmt("%.2f", end) + " at the end";
  return o;
}

// 7

Outcome cost_consistency() {
  double worst = 0.0;
  int paths = 0;
  for (const char* name : {"paper-3x.json", "paper-3x-bidir.json"}) {
    const Scenario s = parse_scenario(path(name));
    for (std::uint64_t k = 0; k < 50; ++k) {
      const std::uint64_t seed = derive_seed(s.master_seed, {tag(StreamTag::Validation), 7, k});
      const PathResult r = run_sample_path(s, s.theta0, seed, s.horizon);
      double nep_sum = 0.0;
      for (const auto& nep : r.trajectory.neps) nep_sum += s.model.weight(nep.queue) * nep.area();
      double direct = 0.0;
      for (int q = 0; q < s.model.queue_count(); ++q)
        direct += s.model.weight(q) * r.trajectory.totals.queues[static_cast<std::size_t>(q)].area;
      nep_sum /= s.horizon;
      direct /= s.horizon;
      worst = std::max(worst, std::abs(nep_sum - direct) / std::max(std::abs(direct), 1e-300));
      ++paths;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = std::to_string(paths) + " paths, max relative difference " + fmt("%.2e", worst);
  return o;
}

}  // namespace

int main() {
  run(1, "deterministic oracle", 10, deterministic_oracle);
  run(2, "stochastic oracle", 300, stochastic_oracle);
  run(3, "batch descent", 600, batch_descent);
  run(4, "invariant suite", 120, invariant_suite);
  run(5, "scalability", 300, scalability);
  run(6, "online and adaptivity", 300, online_adaptivity);
  run(7, "cost accumulator", 60, cost_consistency);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
