#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qodc/contract.hpp"
#include "qodc/rng.hpp"

namespace qodc {

struct Interval {
  double lo;
  double hi;
  bool operator==(const Interval&) const = default;
};

struct EnvConfig {
  int device_count = 40;
  int type_count = 2;
  /// Type values are drawn from `type_count` contiguous, equal-width slices of
  /// this range, one slice per type in ascending order.
  Interval phi_range{1.0, 15.0};
  Interval cap_range{0.5, 1.0};
  double alpha = 0.75;
  double unit_profit = 100.0;
  double penalty = -500.0;
  double data_size_bits = 24e3;
  double rate_bps = 24e6;
  double f_min = 0.01;
  double r_max = 2.0;
  int horizon = 1024;
  std::uint64_t seed = 312;

  void validate() const;
  Interval phi_interval(int type_index) const;
  SlotConfig slot() const { return SlotConfig(data_size_bits, rate_bps); }
  std::size_t action_dim() const { return 2 * static_cast<std::size_t>(type_count); }
  std::size_t feature_dim() const { return 2 * static_cast<std::size_t>(type_count) + 2; }

  bool operator==(const EnvConfig&) const = default;
};

struct NetworkState {
  int device_count = 0;
  int type_count = 0;
  double max_aoi = 0.0;
  double max_latency = 0.0;
  std::vector<double> probabilities;
  std::vector<double> phis;  // ascending

  bool operator==(const NetworkState&) const = default;
};

struct StepOutcome {
  double reward;
  bool feasible;
  Contract contract;
  NetworkState next_state;
};

/// Throws InvalidArgument when `state` breaks its invariants or falls outside
/// the sampling ranges of `config`.
void validate_state(const NetworkState& state, const EnvConfig& config);

NetworkState sample_state(const EnvConfig& config, Rng& rng);

/// Maps a raw action (f_1, r_1, ..., f_K, r_K), each coordinate clamped to
/// [-1, 1], affinely onto f in [f_min, 1] and r in [0, r_max].
Contract decode_action(std::span<const double> raw, const EnvConfig& config);

MarketConfig market_from_state(const NetworkState& state, const EnvConfig& config);

/// BS utility when the contract is feasible, the penalty otherwise.
struct ContractOutcome {
  double reward;
  bool feasible;
};
ContractOutcome score_contract(const NetworkState& state, const Contract& contract,
                               const EnvConfig& config);

StepOutcome step(const NetworkState& state, std::span<const double> raw, const EnvConfig& config,
                 Rng& rng);

/// Network input, version 1: [A_max, D_max] rescaled from cap_range to [0, 1],
/// then Q_1..Q_K unchanged, then phi_k / phi_range.hi.
std::vector<double> state_features(const NetworkState& state, const EnvConfig& config);

/// Parses "M, K, A_max, D_max, Q_1, ..., Q_K, phi_1, ..., phi_K".
NetworkState parse_state_row(std::string_view row);

/// Stateful wrapper owning the rng stream and the current state.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  const NetworkState& reset();
  StepOutcome step(std::span<const double> raw);

  const NetworkState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  Rng rng_;
  NetworkState state_;
};

}  // namespace qodc
