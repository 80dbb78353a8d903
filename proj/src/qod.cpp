#include "qodc/qod.hpp"

#include <cmath>
#include <string>

#include "qodc/errors.hpp"

namespace qodc {

SlotConfig::SlotConfig(double data_size_bits, double rate_bps)
    : data_size_bits_(data_size_bits), rate_bps_(rate_bps), duration_(data_size_bits / rate_bps) {
  if (!(data_size_bits > 0.0) || !(rate_bps > 0.0)) {
    throw InvalidArgument("slot: data size and rate must be positive");
  }
}

FreshnessCaps::FreshnessCaps(double max_aoi, double max_latency)
    : max_aoi(max_aoi), max_latency(max_latency) {
  if (!(max_aoi > 0.0) || !(max_latency > 0.0)) {
    throw InvalidArgument("freshness caps must be positive");
  }
}

UpdateCycle::UpdateCycle(double slots) : slots_(slots) {
  if (!(slots >= 1.0) || !std::isfinite(slots)) {
    throw InvalidArgument("update cycle must span at least one slot, got " + std::to_string(slots));
  }
}

UpdateCycle UpdateCycle::from_frequency(double update_frequency) {
  if (!(update_frequency > 0.0)) {
    throw InvalidArgument("update frequency must be positive");
  }
  return UpdateCycle(1.0 / update_frequency);
}

double average_aoi(UpdateCycle cycle, const SlotConfig& slot) {
  const double theta = cycle.slots();
  return slot.duration() * (1.0 / theta + theta / 2.0 + 0.5);
}

double average_latency(UpdateCycle cycle, const SlotConfig& slot) {
  return slot.duration() * (1.0 + 1.0 / cycle.slots());
}

double qod_log_argument(UpdateCycle cycle, const SlotConfig& slot, const FreshnessCaps& caps,
                        double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1]");
  }
  const double g = aoi_impact(average_aoi(cycle, slot), caps);
  const double h = latency_impact(average_latency(cycle, slot), caps);
  return alpha * (g - h) + h + 1.0;
}

double qod_score(UpdateCycle cycle, const SlotConfig& slot, const FreshnessCaps& caps,
                 double alpha) {
  const double arg = qod_log_argument(cycle, slot, caps, alpha);
  if (!(arg > 0.0)) {
    throw DomainError("QoD log argument " + std::to_string(arg) + " is not positive at theta=" +
                      std::to_string(cycle.slots()));
  }
  return std::log(arg);
}

}  // namespace qodc
