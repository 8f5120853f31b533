#include "greenwave/events.hpp"

namespace greenwave {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::XDown0:
      return "XDown0";
    case EventKind::XUp0:
      return "XUp0";
    case EventKind::ZHitTheta:
      return "ZHitTheta";
    case EventKind::AlphaUp0:
      return "AlphaUp0";
    case EventKind::AlphaDown0:
      return "AlphaDown0";
    case EventKind::G2R:
      return "G2R";
    case EventKind::R2G:
      return "R2G";
    case EventKind::BurstGen:
      return "G";
    case EventKind::BurstJoin:
      return "J";
    case EventKind::BurstGenEnd:
      return "Ge";
    case EventKind::BurstJoinEnd:
      return "Je";
    case EventKind::NepStart:
      return "S";
    case EventKind::NepEnd:
      return "E";
    case EventKind::RateChange:
      return "RateChange";
    case EventKind::Horizon:
      return "Horizon";
  }
  return "?";
}

}  // namespace greenwave
