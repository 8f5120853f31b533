#include "greenwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "greenwave/errors.hpp"

namespace greenwave {

std::string_view to_string(Flow flow) {
  switch (flow) {
    case Flow::Artery:
      return "artery";
    case Flow::Side:
      return "side";
    case Flow::Reverse:
      return "reverse";
  }
  return "?";
}

Flow flow_from_string(std::string_view name) {
  if (name == "artery") return Flow::Artery;
  if (name == "side") return Flow::Side;
  if (name == "reverse") return Flow::Reverse;
  throw ScenarioError("flow", "unknown flow '" + std::string(name) +
                                  "' (expected artery, side or reverse)");
}

ArteryModel::ArteryModel(int intersections, std::vector<double> link_length,
                         std::vector<double> link_speed, double vehicle_length,
                         double departure_rate, bool bidirectional)
    : intersections_(intersections),
      link_length_(std::move(link_length)),
      link_speed_(std::move(link_speed)),
      vehicle_length_(vehicle_length),
      departure_rate_(departure_rate),
      bidirectional_(bidirectional) {
  if (intersections_ < 1) throw ScenarioError("model.N", "N >= 1 violated");
  if (link_length_.size() != static_cast<std::size_t>(intersections_ - 1))
    throw ScenarioError("model.L", "expected N-1 link lengths");
  if (link_speed_.size() != static_cast<std::size_t>(intersections_ - 1))
    throw ScenarioError("model.v", "expected N-1 link speeds");
  build_layout();
}

void ArteryModel::build_layout() {
  const auto nq = static_cast<std::size_t>(queue_count());
  weight_.assign(nq, 1.0);
  queue_departure_.assign(nq, departure_rate_);
  inbound_.assign(nq, -1);
  outbound_.assign(nq, -1);
  links_.clear();
  for (int n = 0; n + 1 < intersections_; ++n) {
    LinkSpec link{queue_index(n, Flow::Artery), queue_index(n + 1, Flow::Artery),
                  link_length_[static_cast<std::size_t>(n)],
                  link_speed_[static_cast<std::size_t>(n)]};
    const int id = static_cast<int>(links_.size());
    outbound_[static_cast<std::size_t>(link.upstream_queue)] = id;
    inbound_[static_cast<std::size_t>(link.downstream_queue)] = id;
    links_.push_back(link);
  }
  if (bidirectional_) {
    for (int n = 0; n + 1 < intersections_; ++n) {
      LinkSpec link{queue_index(n + 1, Flow::Reverse), queue_index(n, Flow::Reverse),
                    link_length_[static_cast<std::size_t>(n)],
                    link_speed_[static_cast<std::size_t>(n)]};
      const int id = static_cast<int>(links_.size());
      outbound_[static_cast<std::size_t>(link.upstream_queue)] = id;
      inbound_[static_cast<std::size_t>(link.downstream_queue)] = id;
      links_.push_back(link);
    }
  }
}

int ArteryModel::queue_count() const noexcept {
  return intersections_ * queues_per_intersection();
}

int ArteryModel::queue_index(int n, Flow flow) const {
  if (flow == Flow::Reverse && !bidirectional_)
    throw ScenarioError("flow", "reverse flow requires a bidirectional model");
  return n * queues_per_intersection() + static_cast<int>(flow);
}

QueueId ArteryModel::queue(int q) const {
  const int per = queues_per_intersection();
  return QueueId{q / per, static_cast<Flow>(q % per)};
}

bool ArteryModel::is_exogenous(int q) const {
  const QueueId id = queue(q);
  switch (id.flow) {
    case Flow::Side:
      return true;
    case Flow::Artery:
      return id.n == 0;
    case Flow::Reverse:
      return id.n == intersections_ - 1;
  }
  return false;
}

void ArteryModel::set_weight(int q, double w) { weight_.at(static_cast<std::size_t>(q)) = w; }

void ArteryModel::set_max_departure(int q, double h) {
  queue_departure_.at(static_cast<std::size_t>(q)) = h;
}

void ArteryModel::validate() const {
  if (intersections_ < 1) throw ScenarioError("model.N", "N >= 1 violated");
  for (std::size_t i = 0; i < link_length_.size(); ++i) {
    if (!(link_length_[i] > 0.0))
      throw ScenarioError("model.L[" + std::to_string(i) + "]", "L_n > 0 violated");
    if (!(link_speed_[i] > 0.0))
      throw ScenarioError("model.v[" + std::to_string(i) + "]", "v_n > 0 violated");
  }
  if (!(vehicle_length_ > 0.0)) throw ScenarioError("model.l", "l > 0 violated");
  if (!(departure_rate_ > 0.0)) throw ScenarioError("model.H", "H > 0 violated");
  for (std::size_t q = 0; q < weight_.size(); ++q) {
    if (!(weight_[q] >= 0.0))
      throw ScenarioError("model.omega", "omega_n^d >= 0 violated at queue " + std::to_string(q));
    if (!(queue_departure_[q] > 0.0))
      throw ScenarioError("model.hOverrides", "h_n^d > 0 violated at queue " + std::to_string(q));
  }
  // Fronts of one link must stay ordered: the mapping t -> t - Delta(t) is
  // increasing only while the tail moves slower than the platoon.
  for (std::size_t k = 0; k < links_.size(); ++k) {
    const auto& link = links_[k];
    const double h = queue_departure_[static_cast<std::size_t>(link.downstream_queue)];
    if (!(link.speed > vehicle_length_ * h)) {
      std::ostringstream os;
      os << "v_n > l*h violated on link " << k << " (v=" << link.speed
         << ", l*h=" << vehicle_length_ * h << ")";
      throw ScenarioError("model.v", os.str());
    }
  }
}

ThetaVector::ThetaVector(std::vector<double> values, double lower, double upper)
    : values_(std::move(values)), lower_(lower), upper_(upper) {}

ThetaVector ThetaVector::from_pairs(const std::vector<std::array<double, 2>>& pairs, double lower,
                                    double upper) {
  std::vector<double> values;
  values.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    values.push_back(p[0]);
    values.push_back(p[1]);
  }
  return ThetaVector(std::move(values), lower, upper);
}

ThetaVector ThetaVector::shifted(std::size_t i, double delta) const {
  ThetaVector copy = *this;
  copy.values_.at(i) += delta;
  return copy;
}

void ThetaVector::clamp() {
  for (auto& v : values_) v = std::clamp(v, lower_, upper_);
}

bool ThetaVector::within_bounds() const {
  return std::all_of(values_.begin(), values_.end(),
                     [&](double v) { return v >= lower_ && v <= upper_; });
}

void ThetaVector::validate() const {
  if (!(lower_ > 0.0)) throw ScenarioError("thetaBounds", "theta_min > 0 violated");
  if (!(upper_ >= lower_)) throw ScenarioError("thetaBounds", "theta_min <= theta_max violated");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= lower_ && values_[i] <= upper_))
      throw ScenarioError("theta0[" + std::to_string(i / 2) + "][" + std::to_string(i % 2) + "]",
                          "theta_min <= theta_i <= theta_max violated");
  }
}

std::array<int, 2> control_signal(std::array<double, 2> clocks, std::array<double, 2> theta) {
  const bool first_running = clocks[0] > 0.0;
  const bool second_running = clocks[1] > 0.0;
  if (first_running == second_running) {
    throw InvalidStateError("phase clocks must have exactly one positive entry (z0=" +
                            std::to_string(clocks[0]) + ", z1=" + std::to_string(clocks[1]) + ")");
  }
  std::array<int, 2> u{0, 0};
  for (int d = 0; d < 2; ++d) {
    const int other = 1 - d;
    const bool running = clocks[d] > 0.0 && clocks[d] < theta[d] && clocks[other] == 0.0;
    const bool other_expired = clocks[other] >= theta[other];
    u[d] = (running || other_expired) ? 1 : 0;
  }
  return u;
}

double departure_rate(double x, int u, double alpha, double h) {
  if (x < 0.0 || alpha < 0.0 || h < 0.0)
    throw DomainError("departure_rate: negative queue content or rate");
  if (u == 0) return 0.0;
  return x > 0.0 ? h : alpha;
}

double transit_delay(double length, double x_downstream, double vehicle_length, double speed) {
  if (x_downstream < 0.0) throw DomainError("transit_delay: negative queue content");
  const double free_space = length - x_downstream * vehicle_length;
  if (!(free_space > 0.0)) {
    std::ostringstream os;
    os << "downstream queue reached the upstream intersection (L=" << length
       << ", x=" << x_downstream << ", l=" << vehicle_length << ")";
    throw BlockingViolation(os.str());
  }
  return free_space / speed;
}

}  // namespace greenwave
