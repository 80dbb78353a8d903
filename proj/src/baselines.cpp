#include "qodc/baselines.hpp"

namespace qodc {

Contract random_contract(const NetworkState& /*state*/, const EnvConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Contract c;
  c.items.resize(static_cast<std::size_t>(config.type_count));
  for (auto& item : c.items) {
    item.update_frequency = 1.0 - unit(rng) * (1.0 - config.f_min);
    item.reward = unit(rng) * config.r_max;
  }
  return c;
}

OracleResult oracle_replay(const NetworkState& state, const EnvConfig& config,
                           const OracleOptions& options) {
  return solve(market_from_state(state, config), options);
}

}  // namespace qodc
