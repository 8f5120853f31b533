#pragma once

#include <compare>
#include <cstdint>

#include "greenwave/departure_history.hpp"
#include "greenwave/events.hpp"
#include "greenwave/model.hpp"
#include "greenwave/simulation.hpp"

namespace greenwave::detail {

// Priority classes for simultaneous events; lower is processed first.
enum class Priority : std::uint8_t {
  Block = 0,
  Switch = 1,
  TailArrival = 4,
  HeadArrival = 5,
  Empty = 6,
  Exogenous = 7,
  Perturbation = 8,
  Horizon = 9,
};

struct Rank {
  Priority cls = Priority::Horizon;
  int n = 0;
  int sub = 0;
  int id = 0;

  friend auto operator<=>(const Rank&, const Rank&) = default;
};

// d = 0 before d = 1, then flow order.
inline int sub_order(Flow flow) { return phase_of(flow) * 4 + static_cast<int>(flow); }

inline double empty_time(double now, double x, double xdot) {
  if (x <= kContentTolerance && xdot <= 0.0) return now;
  if (xdot < 0.0) return now + x / -xdot;
  return kInfinity;
}

inline double block_time(double now, double x, double xdot, double capacity) {
  if (x >= capacity) return now;
  if (xdot > 0.0) return now + (capacity - x) / xdot;
  return kInfinity;
}

// Time at which a departure breakpoint emitted at `emitted` meets the tail
// of the downstream queue, whose content is x + xdot * (t - now).
inline double arrival_time(double now, double emitted, const LinkSpec& link,
                           double vehicle_length, double x_down, double xdot_down) {
  const double delta = (link.length - x_down * vehicle_length) / link.speed;
  const double slope = 1.0 + vehicle_length / link.speed * xdot_down;
  const double u = (delta - (now - emitted)) / slope;
  return u > 0.0 ? now + u : now;
}

inline Priority arrival_priority(FrontKind kind) {
  return kind == FrontKind::BurstTail ? Priority::TailArrival : Priority::HeadArrival;
}

inline EventKind arrival_kind(FrontKind kind) {
  switch (kind) {
    case FrontKind::BurstHead:
      return EventKind::BurstJoin;
    case FrontKind::BurstTail:
      return EventKind::BurstJoinEnd;
    case FrontKind::Interior:
      break;
  }
  return EventKind::RateChange;
}

inline Flow phase_flow(int d) { return d == 1 ? Flow::Side : Flow::Artery; }

}  // namespace greenwave::detail
