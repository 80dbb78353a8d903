#pragma once

// Data-freshness model: average age of information and service latency of a
// periodically refreshed cache, and the log-scored quality-of-data metric
// built from them. All times are in seconds.

namespace qodc {

class SlotConfig {
 public:
  /// `data_size_bits` is the cached payload l, `rate_bps` the link rate tau.
  SlotConfig(double data_size_bits, double rate_bps);

  double data_size_bits() const { return data_size_bits_; }
  double rate_bps() const { return rate_bps_; }
  /// Slot duration t = l / tau.
  double duration() const { return duration_; }

  bool operator==(const SlotConfig&) const = default;

 private:
  double data_size_bits_;
  double rate_bps_;
  double duration_;
};

struct FreshnessCaps {
  double max_aoi;
  double max_latency;

  FreshnessCaps(double max_aoi, double max_latency);
  bool operator==(const FreshnessCaps&) const = default;
};

/// Number of slots per update cycle, theta = 1 / f. Continuous, theta >= 1.
class UpdateCycle {
 public:
  explicit UpdateCycle(double slots);
  static UpdateCycle from_frequency(double update_frequency);

  double slots() const { return slots_; }
  double frequency() const { return 1.0 / slots_; }

 private:
  double slots_;
};

double average_aoi(UpdateCycle cycle, const SlotConfig& slot);
double average_latency(UpdateCycle cycle, const SlotConfig& slot);

inline double aoi_impact(double aoi, const FreshnessCaps& caps) { return caps.max_aoi - aoi; }
inline double latency_impact(double latency, const FreshnessCaps& caps) {
  return caps.max_latency - latency;
}

/// Argument of the QoD logarithm, alpha * (G - H) + H + 1.
double qod_log_argument(UpdateCycle cycle, const SlotConfig& slot, const FreshnessCaps& caps,
                        double alpha);

/// ln(alpha * (G - H) + H + 1). Throws DomainError when the log argument is
/// not positive, i.e. the cycle cannot meet the caps.
double qod_score(UpdateCycle cycle, const SlotConfig& slot, const FreshnessCaps& caps,
                 double alpha);

}  // namespace qodc
