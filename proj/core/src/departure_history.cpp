#include "greenwave/departure_history.hpp"

#include <algorithm>
#include <sstream>

#include "greenwave/errors.hpp"
#include "greenwave/model.hpp"

namespace greenwave {

FrontKind classify_front(double previous_rate, double rate) {
  if (previous_rate == 0.0 && rate > 0.0) return FrontKind::BurstHead;
  if (previous_rate > 0.0 && rate == 0.0) return FrontKind::BurstTail;
  return FrontKind::Interior;
}

void DepartureHistory::push(const Front& front) {
  if (front.emitted < last_emitted_) {
    std::ostringstream os;
    os << "departure breakpoint at " << front.emitted << " precedes " << last_emitted_;
    throw AssumptionViolation(os.str());
  }
  last_emitted_ = front.emitted;
  fronts_.push_back(front);
}

Front DepartureHistory::pop() {
  if (fronts_.empty()) throw DataError("DepartureHistory::pop on empty history");
  Front f = fronts_.front();
  fronts_.pop_front();
  delivered_rate_ = f.rate;
  delivered_since_ = f.emitted;
  return f;
}

double DepartureHistory::rate_at(double s) const {
  if (s < delivered_since_) {
    std::ostringstream os;
    os << "departure history gap: query at " << s << " precedes retained span starting at "
       << delivered_since_;
    throw DataError(os.str());
  }
  double rate = delivered_rate_;
  for (const auto& f : fronts_) {
    if (f.emitted > s) break;
    rate = f.rate;
  }
  return rate;
}

double DepartureHistory::volume(double a, double b) const {
  if (b <= a) return 0.0;
  if (a < delivered_since_) throw DataError("departure history gap in volume query");
  double total = 0.0;
  double start = delivered_since_;
  double rate = delivered_rate_;
  auto accumulate = [&](double stop) {
    const double lo = std::max(a, start);
    const double hi = std::min(b, stop);
    if (hi > lo) total += rate * (hi - lo);
  };
  for (const auto& f : fronts_) {
    accumulate(f.emitted);
    start = f.emitted;
    rate = f.rate;
  }
  accumulate(kInfinity);
  return total;
}

double delayed_upstream_rate(const DepartureHistory& history, double t, double delta) {
  return history.rate_at(t - delta);
}

}  // namespace greenwave
