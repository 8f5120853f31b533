#include <algorithm>
#include <optional>

#include "greenwave/errors.hpp"
#include "greenwave/simulation.hpp"

namespace greenwave {

namespace {

QueueTotals delta(const Totals& begin, const Totals& end, std::size_t q) {
  QueueTotals out = end.queues[q];
  if (q < begin.queues.size()) {
    const QueueTotals& b = begin.queues[q];
    out.area -= b.area;
    out.arrived -= b.arrived;
    out.departed -= b.departed;
    out.stopped -= b.stopped;
  }
  return out;
}

}  // namespace

std::optional<double> stop_ratio(const ArteryModel& model, const Totals& begin,
                                 const Totals& end, Flow direction) {
  double stopped = 0.0;
  double arrived = 0.0;
  for (int q = 0; q < model.queue_count(); ++q) {
    if (model.queue(q).flow != direction) continue;
    const QueueTotals d = delta(begin, end, static_cast<std::size_t>(q));
    stopped += d.stopped;
    arrived += d.arrived;
  }
  if (!(arrived > 0.0)) return std::nullopt;
  return std::clamp(stopped / arrived, 0.0, 1.0);
}

MetricsReport compute_metrics(const ArteryModel& model, const Totals& begin, const Totals& end) {
  const double span = end.t - begin.t;
  if (!(span > 0.0)) throw DataError("metrics over an empty interval");
  if (end.queues.size() != static_cast<std::size_t>(model.queue_count()))
    throw DataError("metrics: totals do not match the model");

  MetricsReport m;
  double side_queue = 0.0;
  double side_rate = 0.0;
  double artery_wait = 0.0;
  double reverse_wait = 0.0;
  bool artery_seen = false;
  bool reverse_seen = false;
  for (int q = 0; q < model.queue_count(); ++q) {
    const QueueTotals d = delta(begin, end, static_cast<std::size_t>(q));
    const double mean = d.area / span;
    const double rate = d.arrived / span;
    m.queue_mean.push_back(mean);
    m.cost += model.weight(q) * mean;
    m.mean_queue_total += mean;
    switch (model.queue(q).flow) {
      case Flow::Side:
        side_queue += mean;
        side_rate += rate;
        break;
      // Artery vehicles queue at every intersection they cross, so the
      // per-vehicle wait adds up along the direction.
      case Flow::Artery:
        if (rate > 0.0) {
          artery_wait += mean / rate;
          artery_seen = true;
        }
        break;
      case Flow::Reverse:
        if (rate > 0.0) {
          reverse_wait += mean / rate;
          reverse_seen = true;
        }
        break;
    }
  }
  if (side_rate > 0.0) m.wait_side = side_queue / side_rate;
  if (artery_seen) m.wait_artery = artery_wait;
  if (reverse_seen) m.wait_reverse = reverse_wait;
  m.stop_ratio_artery = stop_ratio(model, begin, end, Flow::Artery);
  if (model.bidirectional()) m.stop_ratio_reverse = stop_ratio(model, begin, end, Flow::Reverse);
  return m;
}

}  // namespace greenwave
