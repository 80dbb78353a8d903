#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qodc/qod.hpp"

namespace qodc {

/// Slack applied to every IR/IC comparison to absorb roundoff near binding
/// constraints.
inline constexpr double kConstraintTolerance = 1e-12;

/// A device type: phi is the inverse per-update cost, probability its share of
/// the device population.
struct DeviceType {
  double phi;
  double probability;

  bool operator==(const DeviceType&) const = default;
};

/// Validates a type set and returns it sorted ascending by phi.
/// Throws InvalidArgument on non-positive phi, probabilities outside [0, 1] or
/// probabilities not summing to 1 within 1e-9.
std::vector<DeviceType> make_type_set(std::vector<DeviceType> types);

struct ContractItem {
  double update_frequency;
  double reward;

  bool operator==(const ContractItem&) const = default;
};

/// One item per device type; item k is designed for type k.
struct Contract {
  std::vector<ContractItem> items;

  std::size_t size() const { return items.size(); }
  bool operator==(const Contract&) const = default;
};

struct MarketConfig {
  int device_count;
  double unit_profit;
  double alpha;
  SlotConfig slot;
  FreshnessCaps caps;
  std::vector<DeviceType> types;  // sorted ascending by phi

  MarketConfig(int device_count, double unit_profit, double alpha, SlotConfig slot,
               FreshnessCaps caps, std::vector<DeviceType> types);
};

/// u_k = r - f / phi.
inline double device_utility(const ContractItem& item, const DeviceType& type) {
  return item.reward - item.update_frequency / type.phi;
}

/// Individual rationality of `item` for a device of inverse cost `phi`.
inline bool ir_holds(const ContractItem& item, double phi) {
  return item.reward - item.update_frequency / phi >= -kConstraintTolerance;
}

/// A device of inverse cost `phi` weakly prefers `own` over `other`.
inline bool ic_holds(const ContractItem& own, const ContractItem& other, double phi) {
  return own.reward - own.update_frequency / phi >=
         other.reward - other.update_frequency / phi - kConstraintTolerance;
}

/// K x K table of incentive-compatibility outcomes; entry (k, j) says whether
/// type k prefers item k over item j. Diagonal entries are true.
class IcTable {
 public:
  explicit IcTable(std::size_t size) : size_(size), ok_(size * size, true) {}

  std::size_t size() const { return size_; }
  bool at(std::size_t k, std::size_t j) const { return ok_[k * size_ + j]; }
  void set(std::size_t k, std::size_t j, bool value) { ok_[k * size_ + j] = value; }
  bool all() const;

 private:
  std::size_t size_;
  std::vector<bool> ok_;
};

std::vector<bool> check_ir(const Contract& contract, std::span<const DeviceType> types);
IcTable check_ic(const Contract& contract, std::span<const DeviceType> types);

/// All IR and IC constraints hold and every f, r is non-negative.
bool is_feasible(const Contract& contract, std::span<const DeviceType> types);

/// QoD of a device serving contract item `item` in `market`.
double item_qod(const ContractItem& item, const MarketConfig& market);

/// M * sum_k Q_k (beta * QoD_k - r_k). Propagates DomainError from the QoD.
double bs_utility(const Contract& contract, const MarketConfig& market);

/// Probability-weighted mean device utility, sum_k Q_k u_k(item_k).
double mean_device_utility(const Contract& contract, std::span<const DeviceType> types);

}  // namespace qodc
