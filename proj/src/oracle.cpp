#include "qodc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "qodc/errors.hpp"

namespace qodc {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

void require_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw InvalidArgument(std::string(name) + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw InvalidArgument(std::string(name) + " must be strictly increasing");
  }
}

// Depth-first enumeration in lexicographic order. Items before the last are
// enumerated point by point with IR/IC pruning; for the last item the feasible
// rewards form a contiguous index range, found by bisection on the same
// predicates the contract checks use.
class GridSearch {
 public:
  GridSearch(const MarketConfig& market, std::span<const GridSpec> grids)
      : market_(market), grids_(grids), K_(grids.size()), chosen_(K_), best_items_(K_) {
    term_.resize(K_);
    for (std::size_t k = 0; k < K_; ++k) {
      term_[k].resize(grids[k].f_grid.size());
      for (std::size_t i = 0; i < grids[k].f_grid.size(); ++i) {
        try {
          term_[k][i] = market_.unit_profit * item_qod({grids[k].f_grid[i], 0.0}, market_);
        } catch (const DomainError&) {
          term_[k][i] = std::nullopt;
        }
      }
    }
  }

  void run() { descend(0, 0.0); }

  bool found() const { return found_; }
  std::uint64_t feasible_count() const { return feasible_; }
  Contract best() const { return Contract{best_items_}; }

 private:
  // IR for item k and IC in both directions against every earlier item.
  bool compatible_with_prefix(std::size_t k, const ContractItem& item) const {
    const double phi = market_.types[k].phi;
    if (!ir_holds(item, phi)) return false;
    for (std::size_t j = 0; j < k; ++j) {
      if (!ic_holds(item, chosen_[j], phi)) return false;
      if (!ic_holds(chosen_[j], item, market_.types[j].phi)) return false;
    }
    return true;
  }

  // Constraints that hold for all rewards above some threshold.
  bool lower_ok(std::size_t k, const ContractItem& item) const {
    const double phi = market_.types[k].phi;
    if (!ir_holds(item, phi)) return false;
    for (std::size_t j = 0; j < k; ++j) {
      if (!ic_holds(item, chosen_[j], phi)) return false;
    }
    return true;
  }

  // Constraints that hold for all rewards below some threshold.
  bool upper_ok(std::size_t k, const ContractItem& item) const {
    for (std::size_t j = 0; j < k; ++j) {
      if (!ic_holds(chosen_[j], item, market_.types[j].phi)) return false;
    }
    return true;
  }

  double item_value(std::size_t k, double term, double reward) const {
    return market_.types[k].probability * (term - reward);
  }

  void descend(std::size_t k, double partial) {
    const auto& fg = grids_[k].f_grid;
    const auto& rg = grids_[k].r_grid;
    const bool last = k + 1 == K_;
    for (std::size_t fi = 0; fi < fg.size(); ++fi) {
      if (!term_[k][fi]) continue;
      const double term = *term_[k][fi];
      const double f = fg[fi];
      if (last) {
        const auto lo = std::partition_point(rg.begin(), rg.end(), [&](double r) {
          return !lower_ok(k, {f, r});
        });
        const auto hi = std::partition_point(lo, rg.end(), [&](double r) {
          return upper_ok(k, {f, r});
        });
        if (lo == hi) continue;
        feasible_ += static_cast<std::uint64_t>(hi - lo);
        // Utility is non-increasing in the last reward, so the range's first
        // point is its lexicographically-first maximiser.
        const double total = market_.device_count * (partial + item_value(k, term, *lo));
        if (!found_ || total > best_value_) {
          found_ = true;
          best_value_ = total;
          chosen_[k] = {f, *lo};
          best_items_ = chosen_;
        }
        continue;
      }
      for (double r : rg) {
        const ContractItem item{f, r};
        if (!compatible_with_prefix(k, item)) continue;
        chosen_[k] = item;
        descend(k + 1, partial + item_value(k, term, r));
      }
    }
  }

  const MarketConfig& market_;
  std::span<const GridSpec> grids_;
  std::size_t K_;
  std::vector<std::vector<std::optional<double>>> term_;
  std::vector<ContractItem> chosen_;
  std::vector<ContractItem> best_items_;
  double best_value_ = -std::numeric_limits<double>::infinity();
  bool found_ = false;
  std::uint64_t feasible_ = 0;
};

// `count` points of the lattice centre + j * spacing, as close to centred on
// `centre` as the [lo, hi] box allows. Always contains `centre`.
std::vector<double> lattice_window(double centre, double spacing, std::size_t count, double lo,
                                   double hi) {
  auto j_lo = -static_cast<long long>(count / 2);
  if (centre + static_cast<double>(j_lo) * spacing < lo) {
    j_lo = static_cast<long long>(std::ceil((lo - centre) / spacing));
  }
  auto j_hi = j_lo + static_cast<long long>(count) - 1;
  if (centre + static_cast<double>(j_hi) * spacing > hi) {
    j_hi = static_cast<long long>(std::floor((hi - centre) / spacing));
    j_lo = std::max(j_hi - static_cast<long long>(count) + 1,
                    static_cast<long long>(std::ceil((lo - centre) / spacing)));
  }
  j_lo = std::min(j_lo, 0LL);
  j_hi = std::max(j_hi, 0LL);
  std::vector<double> out;
  for (auto j = j_lo; j <= j_hi; ++j) {
    const double v = j == 0 ? centre : centre + static_cast<double>(j) * spacing;
    if (j != 0 && (v < lo || v > hi)) continue;
    out.push_back(v);
  }
  return out;
}

// Single-point axes stay fixed under refinement.
std::vector<double> refined_axis(const std::vector<double>& prev, double centre, double shrink,
                                 double lo, double hi) {
  if (prev.size() < 2) return {centre};
  const double spacing = (prev.back() - prev.front()) / static_cast<double>(prev.size() - 1);
  return lattice_window(centre, shrink * spacing, prev.size(), lo, hi);
}

}  // namespace

GridSpec GridSpec::uniform(double f_min, double f_max, std::size_t f_points, double r_max,
                           std::size_t r_points) {
  if (f_points < 2 || r_points < 2) throw InvalidArgument("grids need at least two points");
  GridSpec g{linspace(f_min, f_max, f_points), linspace(0.0, r_max, r_points)};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  require_increasing(f_grid, "f_grid");
  require_increasing(r_grid, "r_grid");
  if (!(f_grid.front() > 0.0) || f_grid.back() > 1.0) {
    throw InvalidArgument("f_grid must lie in (0, 1]");
  }
  if (r_grid.front() < 0.0 || !(r_grid.back() > 0.0)) {
    throw InvalidArgument("r_grid must lie in [0, r_max] with r_max > 0");
  }
}

OracleResult solve_grid(const MarketConfig& market, const GridSpec& grid) {
  grid.validate();
  const std::vector<GridSpec> grids(market.types.size(), grid);
  return solve_grid(market, grids,
                    {grid.f_grid.front(), grid.f_grid.back(), grid.r_grid.front(),
                     grid.r_grid.back()});
}

OracleResult solve_grid(const MarketConfig& market, std::span<const GridSpec> item_grids,
                        const SearchBox& box) {
  if (item_grids.size() != market.types.size()) {
    throw InvalidArgument("need one grid per device type");
  }
  double candidates = 1.0;
  for (const auto& g : item_grids) {
    g.validate();
    candidates *= static_cast<double>(g.f_grid.size()) * static_cast<double>(g.r_grid.size());
  }
  if (candidates > kMaxGridCandidates) {
    throw GridTooLarge("grid has " + std::to_string(candidates) + " candidate contracts, limit is " +
                       std::to_string(kMaxGridCandidates));
  }

  GridSearch search(market, item_grids);
  search.run();
  if (!search.found()) throw NoFeasiblePoint("no grid contract satisfies IR and IC");

  OracleResult result;
  result.best_contract = search.best();
  result.best_utility = bs_utility(result.best_contract, market);
  result.feasible_count = search.feasible_count();
  result.evaluated_count = static_cast<std::uint64_t>(candidates);
  result.grids.assign(item_grids.begin(), item_grids.end());
  result.box = box;
  return result;
}

OracleResult refine(const MarketConfig& market, const OracleResult& seed_result, double shrink,
                    int rounds) {
  if (rounds < 1) throw InvalidArgument("refine needs at least one round");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw InvalidArgument("shrink must lie in (0, 1]");
  OracleResult current = seed_result;
  for (int round = 0; round < rounds; ++round) {
    std::vector<GridSpec> grids;
    grids.reserve(current.grids.size());
    for (std::size_t k = 0; k < current.grids.size(); ++k) {
      const auto& prev = current.grids[k];
      const auto& item = current.best_contract.items[k];
      const auto& box = current.box;
      grids.push_back({refined_axis(prev.f_grid, item.update_frequency, shrink, box.f_lo, box.f_hi),
                       refined_axis(prev.r_grid, item.reward, shrink, box.r_lo, box.r_hi)});
    }
    OracleResult next = solve_grid(market, grids, current.box);
    if (next.best_utility < current.best_utility) {
      next.best_contract = current.best_contract;
      next.best_utility = current.best_utility;
    }
    current = std::move(next);
  }
  return current;
}

OracleResult solve(const MarketConfig& market, const OracleOptions& options) {
  auto result = solve_grid(market, options.grid());
  if (options.refine_rounds > 0) {
    result = refine(market, result, options.shrink, options.refine_rounds);
  }
  return result;
}

}  // namespace qodc
