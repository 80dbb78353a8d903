#include "qodc/contract.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qodc/errors.hpp"

namespace qodc {

namespace {

void require_matching(const Contract& contract, std::span<const DeviceType> types) {
  if (contract.size() != types.size()) {
    throw InvalidArgument("contract has " + std::to_string(contract.size()) + " items for " +
                          std::to_string(types.size()) + " device types");
  }
}

}  // namespace

std::vector<DeviceType> make_type_set(std::vector<DeviceType> types) {
  if (types.empty()) throw InvalidArgument("type set is empty");
  double total = 0.0;
  for (const auto& t : types) {
    if (!(t.phi > 0.0)) throw InvalidArgument("device type phi must be positive");
    if (!(t.probability >= 0.0 && t.probability <= 1.0)) {
      throw InvalidArgument("device type probability must lie in [0, 1]");
    }
    total += t.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("type probabilities sum to " + std::to_string(total));
  }
  std::stable_sort(types.begin(), types.end(),
                   [](const DeviceType& a, const DeviceType& b) { return a.phi < b.phi; });
  return types;
}

MarketConfig::MarketConfig(int device_count, double unit_profit, double alpha, SlotConfig slot,
                           FreshnessCaps caps, std::vector<DeviceType> types)
    : device_count(device_count),
      unit_profit(unit_profit),
      alpha(alpha),
      slot(slot),
      caps(caps),
      types(make_type_set(std::move(types))) {
  if (device_count < 1) throw InvalidArgument("market needs at least one device");
  if (!(unit_profit > 0.0)) throw InvalidArgument("unit profit must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
}

bool IcTable::all() const {
  return std::all_of(ok_.begin(), ok_.end(), [](bool b) { return b; });
}

std::vector<bool> check_ir(const Contract& contract, std::span<const DeviceType> types) {
  require_matching(contract, types);
  std::vector<bool> out(types.size());
  for (std::size_t k = 0; k < types.size(); ++k) {
    out[k] = ir_holds(contract.items[k], types[k].phi);
  }
  return out;
}

IcTable check_ic(const Contract& contract, std::span<const DeviceType> types) {
  require_matching(contract, types);
  IcTable table(types.size());
  for (std::size_t k = 0; k < types.size(); ++k) {
    for (std::size_t j = 0; j < types.size(); ++j) {
      if (k == j) continue;
      table.set(k, j, ic_holds(contract.items[k], contract.items[j], types[k].phi));
    }
  }
  return table;
}

bool is_feasible(const Contract& contract, std::span<const DeviceType> types) {
  if (contract.size() != types.size()) return false;
  for (std::size_t k = 0; k < types.size(); ++k) {
    const auto& item = contract.items[k];
    if (!(item.update_frequency >= 0.0) || !(item.reward >= 0.0) || !(types[k].phi > 0.0)) {
      return false;
    }
  }
  const auto ir = check_ir(contract, types);
  if (!std::all_of(ir.begin(), ir.end(), [](bool b) { return b; })) return false;
  return check_ic(contract, types).all();
}

double item_qod(const ContractItem& item, const MarketConfig& market) {
  return qod_score(UpdateCycle::from_frequency(item.update_frequency), market.slot, market.caps,
                   market.alpha);
}

double bs_utility(const Contract& contract, const MarketConfig& market) {
  require_matching(contract, market.types);
  double sum = 0.0;
  for (std::size_t k = 0; k < contract.size(); ++k) {
    const auto& item = contract.items[k];
    sum += market.types[k].probability * (market.unit_profit * item_qod(item, market) - item.reward);
  }
  return market.device_count * sum;
}

double mean_device_utility(const Contract& contract, std::span<const DeviceType> types) {
  require_matching(contract, types);
  double sum = 0.0;
  for (std::size_t k = 0; k < types.size(); ++k) {
    sum += types[k].probability * device_utility(contract.items[k], types[k]);
  }
  return sum;
}

}  // namespace qodc
