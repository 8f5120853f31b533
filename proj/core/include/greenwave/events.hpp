#pragma once

#include <cstdint>
#include <string_view>

#include "greenwave/model.hpp"

namespace greenwave {

/// Event taxonomy of the hybrid model. Basic events are followed in the log
/// by the light-switching, burst-tracing and NEP events they induce at the
/// same instant.
enum class EventKind : std::uint8_t {
  XDown0,        // queue content reaches 0 from above
  XUp0,          // queue content becomes positive
  ZHitTheta,     // phase clock reaches its GREEN length
  AlphaUp0,      // exogenous arrival rate becomes positive
  AlphaDown0,    // exogenous arrival rate drops to 0
  G2R,           // GREEN to RED for (n, d)
  R2G,           // RED to GREEN for (n, d)
  BurstGen,      // G: upstream artery departure rises from 0
  BurstJoin,     // J: burst head reaches the downstream queue tail
  BurstGenEnd,   // G^e: upstream artery departure falls to 0
  BurstJoinEnd,  // J^e: burst tail reaches the downstream queue tail
  NepStart,      // S
  NepEnd,        // E
  RateChange,    // positive-to-positive arrival change (exogenous or in-burst)
  Horizon,
};

std::string_view to_string(EventKind kind);

struct SimEvent {
  EventKind kind = EventKind::Horizon;
  int n = -1;  // 0-based intersection (burst events: origin intersection)
  int d = -1;  // signal phase, -1 when not applicable
  Flow flow = Flow::Artery;
  int m = 0;  // burst ordinal on its link, 0 when not applicable
  double tau = 0.0;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// Same event identity ignoring the occurrence time.
inline bool same_kind(const SimEvent& a, const SimEvent& b) {
  return a.kind == b.kind && a.n == b.n && a.d == b.d && a.flow == b.flow && a.m == b.m;
}

}  // namespace greenwave
