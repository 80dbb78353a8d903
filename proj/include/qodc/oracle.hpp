#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qodc/contract.hpp"

namespace qodc {

/// Candidate update frequencies and rewards for one contract item. Both lists
/// are non-empty and strictly increasing.
struct GridSpec {
  std::vector<double> f_grid;
  std::vector<double> r_grid;

  static GridSpec uniform(double f_min, double f_max, std::size_t f_points, double r_max,
                          std::size_t r_points);
  void validate() const;
};

/// Domain the refinement stays inside.
struct SearchBox {
  double f_lo, f_hi, r_lo, r_hi;
};

struct OracleResult {
  Contract best_contract;
  double best_utility = 0.0;
  std::uint64_t feasible_count = 0;
  std::uint64_t evaluated_count = 0;
  /// Per-item grids the result was found on.
  std::vector<GridSpec> grids;
  SearchBox box{};
};

/// Upper bound on |f_grid|^K * |r_grid|^K accepted by solve_grid.
inline constexpr double kMaxGridCandidates = 1e8;

/// Exhaustive search over every contract on the grid. Returns the feasible
/// contract of highest BS utility; ties go to the first in lexicographic
/// order (f_1, r_1, ..., f_K, r_K). Throws GridTooLarge or NoFeasiblePoint.
OracleResult solve_grid(const MarketConfig& market, const GridSpec& grid);
OracleResult solve_grid(const MarketConfig& market, std::span<const GridSpec> item_grids,
                        const SearchBox& box);

/// Re-solves `rounds` times on per-item grids centred on the incumbent, each
/// round shrinking the grid spacing by `shrink`. The incumbent always lies on
/// the new grid, so utility never decreases.
OracleResult refine(const MarketConfig& market, const OracleResult& seed_result, double shrink,
                    int rounds);

struct OracleOptions {
  std::size_t f_points = 64;
  std::size_t r_points = 64;
  double f_min = 0.01;
  double r_max = 2.0;
  int refine_rounds = 2;
  double shrink = 0.25;

  GridSpec grid() const { return GridSpec::uniform(f_min, 1.0, f_points, r_max, r_points); }
  bool operator==(const OracleOptions&) const = default;
};

/// solve_grid on the default grid followed by `refine_rounds` refinements.
OracleResult solve(const MarketConfig& market, const OracleOptions& options);

}  // namespace qodc
