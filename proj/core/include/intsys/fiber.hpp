#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "intsys/flow.hpp"
#include "intsys/grid.hpp"
#include "intsys/hamsys.hpp"

namespace intsys::fiber {

/// Band factor kappa in tol_i = max(atol, kappa * |h (.) grad f_i(center)|).
inline constexpr double kBandFactor = 0.75;
inline constexpr double kDefaultAtol = 1e-3;

enum class Connectivity { Face, Corner };

/// Grid cells whose centers lie in the gradient-aware band around F^{-1}(c).
struct FiberSample {
  CellGrid grid;
  Point target;
  double atol = kDefaultAtol;
  double band_factor = kBandFactor;
  std::vector<CellIndex> marked;  // sorted ascending
  std::size_t domain_errors = 0;  // cells skipped because F or DF failed

  bool contains(CellIndex cell) const noexcept;
};

FiberSample sample_fiber(const hamsys::IntegrableSystem& sys, std::span<const double> target,
                         const CellGrid& grid, double atol = kDefaultAtol,
                         double band_factor = kBandFactor);

/// Partition of the marked cells into connected components. Labels are
/// numbered 0..count-1 in increasing order of each component's smallest cell,
/// which is also its representative.
struct ComponentLabeling {
  std::vector<CellIndex> cells;  // == FiberSample::marked
  std::vector<int> labels;       // parallel to cells
  std::vector<CellIndex> representatives;
  std::vector<std::size_t> sizes;
  Connectivity connectivity = Connectivity::Face;

  std::size_t count() const noexcept { return representatives.size(); }
  std::optional<int> label_of(CellIndex cell) const noexcept;
};

/// Union-find over neighbouring marked cells: 2*(2n) face neighbours, or all
/// 3^(2n)-1 neighbours with Connectivity::Corner.
ComponentLabeling connected_components(const CellGrid& grid, std::span<const CellIndex> marked,
                                       Connectivity connectivity = Connectivity::Face);
ComponentLabeling connected_components(const FiberSample& fs,
                                       Connectivity connectivity = Connectivity::Face);

std::size_t fiber_component_count(const hamsys::IntegrableSystem& sys, std::span<const double> target,
                                  const CellGrid& grid, double atol = kDefaultAtol,
                                  Connectivity connectivity = Connectivity::Face);

/// Cells that may contain a point where rank DF < n: the smallest singular
/// value of DF at the center is within reach of the second derivatives over
/// half a cell diagonal. Sorted ascending.
std::vector<CellIndex> near_critical_cells(const hamsys::IntegrableSystem& sys, const CellGrid& grid,
                                           double factor = 1.0);

struct ScanRow {
  Point value;
  std::size_t count = 0;
  bool critical = false;  // component count at this value is unreliable
};

struct BifurcationTable {
  std::vector<ScanRow> rows;
};

struct ScanOptions {
  double atol = kDefaultAtol;
  Connectivity connectivity = Connectivity::Face;
  double critical_factor = 1.0;
};

/// Component count at each explicit image value. A row is flagged critical
/// when its sampled fiber contains a near-critical cell.
BifurcationTable bifurcation_scan(const hamsys::IntegrableSystem& sys, std::span<const Point> values,
                                  const CellGrid& grid, const ScanOptions& options = {});

/// Component count at each lattice value (cell midpoint). Rows are also
/// flagged when a near-critical cell maps into the row's image cell.
BifurcationTable bifurcation_scan(const hamsys::IntegrableSystem& sys, const ImageLattice& lattice,
                                  const CellGrid& grid, const ScanOptions& options = {});

struct OrbitFiberReport {
  bool containment = false;
  std::optional<int> label;  // component hit by the seed cell
  std::size_t cloud_cells = 0;
  std::size_t stray_cells = 0;  // cloud cells unmarked or on another label
  std::size_t component_cells = 0;
  std::size_t hit_cells = 0;
  /// hit_cells / component_cells
  double direct_coverage = 0.0;
  /// Fraction of component cells that are hit or face-adjacent to a hit cell.
  double coverage = 0.0;
  std::size_t components = 0;
  flow::OrbitSample orbit;
};

/// Explores the orbit through x0 on the grid's cells and compares it with the
/// fiber component through x0.
OrbitFiberReport orbit_vs_fiber_check(const hamsys::IntegrableSystem& sys, std::span<const double> x0,
                                      std::size_t budget, const CellGrid& grid,
                                      double atol = kDefaultAtol, double step = flow::kDefaultStep);

}  // namespace intsys::fiber
