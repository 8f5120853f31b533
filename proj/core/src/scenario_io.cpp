#include "greenwave/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "greenwave/errors.hpp"

namespace greenwave {

using nlohmann::json;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

// Cursor into the document that remembers its field path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) throw ScenarioError(child(key), "required field is missing");
    return Node(j_.at(key), child(key));
  }

  Node at(std::size_t i) const {
    return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number, found " + type_name(j_));
    return j_.get<double>();
  }

  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer, found " + type_name(j_));
    return j_.get<int>();
  }

  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0))
      fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string, found " + type_name(j_));
    return j_.get<std::string>();
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }

  // A scalar applies to every entry; an array must have `count` entries.
  std::vector<double> numbers(std::size_t count) const {
    if (j_.is_number()) return std::vector<double>(count, number());
    if (size() != count)
      fail("expected " + std::to_string(count) + " entries, found " + std::to_string(size()));
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(at(i).number());
    return out;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ScenarioError(path_, message); }

 private:
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

Flow parse_flow(const Node& node) {
  try {
    return flow_from_string(node.string());
  } catch (const ModelError&) {
    node.fail("expected one of artery, side, reverse");
  }
}

int parse_intersection(const Node& node, int intersections) {
  const int n = node.integer();
  if (n < 1 || n > intersections)
    node.fail("intersection index must lie in 1.." + std::to_string(intersections));
  return n - 1;
}

ArteryModel parse_model(const Node& m) {
  const int count = m.at("intersections").integer();
  if (count < 1) m.at("intersections").fail("N >= 1 violated");
  const auto links = static_cast<std::size_t>(count - 1);
  std::vector<double> length;
  std::vector<double> speed;
  if (links > 0) {
    length = m.at("linkLength").numbers(links);
    speed = m.at("linkSpeed").numbers(links);
  }
  const bool bidirectional = m.has("bidirectional") && m.at("bidirectional").boolean();
  ArteryModel model(count, length, speed, m.at("vehicleLength").number(),
                    m.at("departureRate").number(), bidirectional);
  if (m.has("overrides")) {
    const Node list = m.at("overrides");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node o = list.at(i);
      const int n = parse_intersection(o.at("n"), count);
      const Flow flow = parse_flow(o.at("flow"));
      if (flow == Flow::Reverse && !bidirectional)
        o.at("flow").fail("reverse queues exist only on bidirectional models");
      const int q = model.queue_index(n, flow);
      if (o.has("departureRate")) model.set_max_departure(q, o.at("departureRate").number());
      if (o.has("weight")) model.set_weight(q, o.at("weight").number());
    }
  }
  return model;
}

void parse_arrivals(const Node& a, Scenario& s) {
  const ArteryModel& model = s.model;
  s.arrivals.assign(static_cast<std::size_t>(model.queue_count()), std::nullopt);
  const double mean_on = a.number_or("meanOn", 10.0);
  const double mean_off = a.number_or("meanOff", 10.0);
  const bool constant = a.has("constant") && a.at("constant").boolean();
  auto make = [&](double rate, int q, double on, double off) {
    const auto stream = static_cast<std::uint64_t>(q);
    return constant || off == 0.0 ? ArrivalProcess::constant(rate, stream)
                                  : ArrivalProcess::on_off(rate, on, off, stream);
  };

  if (a.has("queues")) {
    const Node list = a.at("queues");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node e = list.at(i);
      const int n = parse_intersection(e.at("n"), model.intersections());
      const Flow flow = parse_flow(e.at("flow"));
      if (flow == Flow::Reverse && !model.bidirectional())
        e.at("flow").fail("reverse queues exist only on bidirectional models");
      const int q = model.queue_index(n, flow);
      if (!model.is_exogenous(q))
        e.fail("non-exogenous artery queue must not have an arrival process "
               "(it is fed by the upstream intersection)");
      s.arrivals[static_cast<std::size_t>(q)] =
          make(e.at("meanRate").number(), q, e.number_or("meanOn", mean_on),
               e.number_or("meanOff", mean_off));
    }
  } else {
    const auto n = static_cast<std::size_t>(model.intersections());
    const std::vector<double> side = a.at("side").numbers(n);
    const double artery = a.at("artery").number();
    const double reverse = a.number_or("reverse", 0.0);
    if (a.has("reverse") && !model.bidirectional())
      a.at("reverse").fail("reverse demand requires a bidirectional model");
    for (int q = 0; q < model.queue_count(); ++q) {
      if (!model.is_exogenous(q)) continue;
      const QueueId id = model.queue(q);
      const double rate = id.flow == Flow::Side     ? side[static_cast<std::size_t>(id.n)]
                          : id.flow == Flow::Artery ? artery
                                                    : reverse;
      s.arrivals[static_cast<std::size_t>(q)] = make(rate, q, mean_on, mean_off);
    }
  }
  for (int q = 0; q < model.queue_count(); ++q) {
    if (model.is_exogenous(q) && !s.arrivals[static_cast<std::size_t>(q)])
      s.arrivals[static_cast<std::size_t>(q)] = make(0.0, q, mean_on, mean_off);
  }
  for (const auto& p : s.arrivals) {
    if (!p) continue;
    if (p->mean_rate < 0.0) a.fail("rates >= 0 violated");
    if (!(p->mean_on > 0.0) || p->mean_off < 0.0) a.fail("meanOn > 0 and meanOff >= 0 required");
  }
}

OptimizerConfig parse_optimizer(const Node& o) {
  OptimizerConfig c;
  c.rho0 = o.number_or("rho0", c.rho0);
  c.decay = o.number_or("decay", c.decay);
  if (o.has("iterations")) c.iterations = o.at("iterations").integer();
  if (o.has("replications")) c.replications = o.at("replications").integer();
  if (o.has("evaluationReplications"))
    c.evaluation_replications = o.at("evaluationReplications").integer();
  c.window = o.number_or("window", c.window);
  c.online_horizon = o.number_or("onlineHorizon", c.online_horizon);
  if (o.has("normalization")) {
    const std::string n = o.at("normalization").string();
    if (n == "none") {
      c.normalization = Normalization::None;
    } else if (n == "gradient-norm") {
      c.normalization = Normalization::GradientNorm;
    } else {
      o.at("normalization").fail("expected none or gradient-norm");
    }
  }
  try {
    c.validate();
  } catch (const ScenarioError& e) {
    throw ScenarioError("optimizer." + e.field(), e.what());
  }
  return c;
}

Scenario build(const json& doc) {
  const Node root(doc, "");
  if (!doc.is_object()) root.fail("scenario must be a JSON object");
  Scenario s;
  s.name = root.has("name") ? root.at("name").string() : "scenario";
  s.model = parse_model(root.at("model"));
  s.model.validate();
  parse_arrivals(root.at("arrivals"), s);

  const Node theta = root.at("theta0");
  const auto n = static_cast<std::size_t>(s.model.intersections());
  if (theta.size() != n)
    theta.fail("expected " + std::to_string(n) + " [artery, side] pairs, found " +
               std::to_string(theta.size()));
  std::vector<std::array<double, 2>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const Node pair = theta.at(i);
    if (pair.size() != 2) pair.fail("expected [artery, side] GREEN lengths");
    pairs.push_back({pair.at(std::size_t{0}).number(), pair.at(std::size_t{1}).number()});
  }
  double lower = 5.0;
  double upper = 120.0;
  if (root.has("thetaBounds")) {
    const Node b = root.at("thetaBounds");
    if (b.size() != 2) b.fail("expected [min, max]");
    lower = b.at(std::size_t{0}).number();
    upper = b.at(std::size_t{1}).number();
  }
  s.theta0 = ThetaVector::from_pairs(pairs, lower, upper);

  s.horizon = root.number_or("horizon", s.horizon);
  if (root.has("masterSeed")) s.master_seed = root.at("masterSeed").unsigned_integer();
  if (root.has("rateMode")) {
    const std::string mode = root.at("rateMode").string();
    if (mode == "exact-fluid") {
      s.rate_mode = RateMode::ExactFluid;
    } else if (mode == "windowed-estimate") {
      s.rate_mode = RateMode::WindowedEstimate;
    } else {
      root.at("rateMode").fail("expected exact-fluid or windowed-estimate");
    }
  }
  s.rate_window = root.number_or("rateWindow", s.rate_window);

  if (root.has("perturbations")) {
    const Node list = root.at("perturbations");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node p = list.at(i);
      const int pn = parse_intersection(p.at("n"), s.model.intersections());
      const Flow flow = parse_flow(p.at("flow"));
      if (flow == Flow::Reverse && !s.model.bidirectional())
        p.at("flow").fail("reverse queues exist only on bidirectional models");
      s.perturbations.push_back(
          {p.at("time").number(), s.model.queue_index(pn, flow), p.at("meanRate").number()});
    }
  }
  if (root.has("optimizer")) s.optimizer = parse_optimizer(root.at("optimizer"));
  s.validate();
  return s;
}

}  // namespace

Scenario parse_scenario_text(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << column << ": malformed JSON";
    throw ScenarioError("", os.str());
  }
  return build(doc);
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("", "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario_text(buf.str(), path.string());
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  const ArteryModel& m = s.model;
  json doc;
  doc["name"] = s.name;
  json model;
  model["intersections"] = m.intersections();
  model["linkLength"] = std::vector<double>(m.link_length().begin(), m.link_length().end());
  model["linkSpeed"] = std::vector<double>(m.link_speed().begin(), m.link_speed().end());
  model["vehicleLength"] = m.vehicle_length();
  model["departureRate"] = m.departure_rate();
  model["bidirectional"] = m.bidirectional();
  json overrides = json::array();
  for (int q = 0; q < m.queue_count(); ++q) {
    if (m.max_departure(q) == m.departure_rate() && m.weight(q) == 1.0) continue;
    const QueueId id = m.queue(q);
    overrides.push_back({{"n", id.n + 1},
                         {"flow", std::string(to_string(id.flow))},
                         {"departureRate", m.max_departure(q)},
                         {"weight", m.weight(q)}});
  }
  if (!overrides.empty()) model["overrides"] = overrides;
  doc["model"] = model;

  json queues = json::array();
  for (int q = 0; q < m.queue_count(); ++q) {
    const ArrivalProcess* p = s.arrival(q);
    if (!p) continue;
    const QueueId id = m.queue(q);
    queues.push_back({{"n", id.n + 1},
                      {"flow", std::string(to_string(id.flow))},
                      {"meanRate", p->mean_rate},
                      {"meanOn", p->mean_on},
                      {"meanOff", p->mean_off}});
  }
  doc["arrivals"] = {{"queues", queues}};

  json theta = json::array();
  for (int n = 0; n < m.intersections(); ++n)
    theta.push_back({s.theta0.green(n, 0), s.theta0.green(n, 1)});
  doc["theta0"] = theta;
  doc["thetaBounds"] = {s.theta0.lower(), s.theta0.upper()};
  doc["horizon"] = s.horizon;
  doc["masterSeed"] = s.master_seed;
  doc["rateMode"] = std::string(to_string(s.rate_mode));
  doc["rateWindow"] = s.rate_window;
  json perturbations = json::array();
  for (const auto& p : s.perturbations) {
    const QueueId id = m.queue(p.queue);
    perturbations.push_back({{"time", p.time},
                             {"n", id.n + 1},
                             {"flow", std::string(to_string(id.flow))},
                             {"meanRate", p.mean_rate}});
  }
  if (!perturbations.empty()) doc["perturbations"] = perturbations;
  const OptimizerConfig& o = s.optimizer;
  doc["optimizer"] = {{"rho0", o.rho0},
                      {"decay", o.decay},
                      {"iterations", o.iterations},
                      {"replications", o.replications},
                      {"evaluationReplications", o.evaluation_replications},
                      {"window", o.window},
                      {"onlineHorizon", o.online_horizon},
                      {"normalization", std::string(to_string(o.normalization))}};
  return doc.dump(2) + "\n";
}

}  // namespace greenwave
