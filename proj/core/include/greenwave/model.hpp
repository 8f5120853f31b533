#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace greenwave {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Which traffic stream a queue belongs to. Artery runs from intersection 1
/// towards N; Reverse is the mirrored artery stream from N towards 1 and is
/// only present on bidirectional models. Both artery streams share signal
/// phase 0; side roads use phase 1.
enum class Flow : std::uint8_t { Artery = 0, Side = 1, Reverse = 2 };

std::string_view to_string(Flow flow);
Flow flow_from_string(std::string_view name);

constexpr int phase_of(Flow flow) { return flow == Flow::Side ? 1 : 0; }

struct QueueId {
  int n = 0;  // 0-based intersection
  Flow flow = Flow::Artery;

  int phase() const { return phase_of(flow); }
  friend bool operator==(const QueueId&, const QueueId&) = default;
};

/// A directed road segment carrying flow bursts between two artery queues.
struct LinkSpec {
  int upstream_queue = -1;
  int downstream_queue = -1;
  double length = 0.0;  // meters
  double speed = 0.0;   // m/s
};

/// Static geometry and flow constants of an N-intersection artery.
///
/// Queue indices are laid out per intersection in the order
/// Artery, Side[, Reverse]; parameter index of GREEN length theta_n^d is 2n+d.
class ArteryModel {
 public:
  ArteryModel() = default;
  ArteryModel(int intersections, std::vector<double> link_length, std::vector<double> link_speed,
              double vehicle_length, double departure_rate, bool bidirectional);

  int intersections() const noexcept { return intersections_; }
  bool bidirectional() const noexcept { return bidirectional_; }
  double vehicle_length() const noexcept { return vehicle_length_; }
  double departure_rate() const noexcept { return departure_rate_; }

  std::span<const double> link_length() const noexcept { return link_length_; }
  std::span<const double> link_speed() const noexcept { return link_speed_; }

  int queue_count() const noexcept;
  int queues_per_intersection() const noexcept { return bidirectional_ ? 3 : 2; }
  int queue_index(int n, Flow flow) const;
  QueueId queue(int q) const;

  int parameter_count() const noexcept { return 2 * intersections_; }
  static int parameter_index(int n, int phase) { return 2 * n + phase; }

  /// Arrival process is exogenous: every side road, the artery head at
  /// intersection 1 and the reverse head at intersection N.
  bool is_exogenous(int q) const;

  /// Links in index order: forward links 0..N-2 then reverse links.
  const std::vector<LinkSpec>& links() const noexcept { return links_; }
  int inbound_link(int q) const { return inbound_[static_cast<std::size_t>(q)]; }
  int outbound_link(int q) const { return outbound_[static_cast<std::size_t>(q)]; }

  double weight(int q) const { return weight_[static_cast<std::size_t>(q)]; }
  double max_departure(int q) const { return queue_departure_[static_cast<std::size_t>(q)]; }
  void set_weight(int q, double w);
  void set_max_departure(int q, double h);

  /// Throws ScenarioError naming the violated invariant.
  void validate() const;

 private:
  void build_layout();

  int intersections_ = 0;
  std::vector<double> link_length_;
  std::vector<double> link_speed_;
  double vehicle_length_ = 0.0;
  double departure_rate_ = 0.0;
  bool bidirectional_ = false;
  std::vector<double> weight_;
  std::vector<double> queue_departure_;
  std::vector<LinkSpec> links_;
  std::vector<int> inbound_;
  std::vector<int> outbound_;
};

/// GREEN lengths ordered [theta_1^0, theta_1^1, ..., theta_N^0, theta_N^1] with
/// box bounds shared by every entry.
class ThetaVector {
 public:
  ThetaVector() = default;
  ThetaVector(std::vector<double> values, double lower, double upper);

  static ThetaVector from_pairs(const std::vector<std::array<double, 2>>& pairs, double lower,
                                double upper);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double green(int n, int phase) const { return values_[static_cast<std::size_t>(2 * n + phase)]; }
  std::span<const double> values() const noexcept { return values_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  /// Copy with entry i shifted by delta (no projection).
  ThetaVector shifted(std::size_t i, double delta) const;
  void clamp();
  bool within_bounds() const;
  void validate() const;

 private:
  std::vector<double> values_;
  double lower_ = 0.0;
  double upper_ = kInfinity;
};

// Local transition functions of the hybrid model.

/// Signal pair (u^0, u^1) implied by the phase clocks of one intersection.
std::array<int, 2> control_signal(std::array<double, 2> clocks, std::array<double, 2> theta);

/// Departure rate: H while queued on GREEN, pass-through on an empty GREEN, 0 on RED.
double departure_rate(double x, int u, double alpha, double h);

/// Transit delay between adjacent intersections given the downstream artery queue.
double transit_delay(double length, double x_downstream, double vehicle_length, double speed);

/// Queue content derivative.
constexpr double queue_rate(double alpha, double beta) { return alpha - beta; }

}  // namespace greenwave
