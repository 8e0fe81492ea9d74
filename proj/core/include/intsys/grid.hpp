#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intsys/sampling.hpp"

namespace intsys {

using CellIndex = std::uint64_t;

/// Regular cell decomposition of a box. Cells are addressed by a linear
/// index with axis 0 varying fastest; evaluation points are cell centers.
class CellGrid {
 public:
  /// Upper bound on cell_count() accepted by the constructor.
  static constexpr CellIndex kMaxCells = CellIndex{1} << 32;

  CellGrid(Box box, std::vector<std::size_t> resolution);
  static CellGrid uniform(Box box, std::size_t resolution);

  const Box& box() const noexcept { return box_; }
  std::size_t dim() const noexcept { return resolution_.size(); }
  std::size_t resolution(std::size_t k) const { return resolution_.at(k); }
  const std::vector<std::size_t>& resolutions() const noexcept { return resolution_; }
  double cell_size(std::size_t k) const { return size_.at(k); }
  const std::vector<double>& cell_sizes() const noexcept { return size_; }
  CellIndex cell_count() const noexcept { return count_; }
  /// Euclidean length of the cell diagonal.
  double cell_diagonal() const noexcept;

  /// Cell containing x, or nullopt outside the box. The upper face belongs to
  /// the last cell.
  std::optional<CellIndex> locate(std::span<const double> x) const noexcept;

  void center(CellIndex cell, std::span<double> out) const noexcept;
  Point center(CellIndex cell) const;

  void coords(CellIndex cell, std::span<std::size_t> out) const noexcept;
  CellIndex index(std::span<const std::size_t> coords) const noexcept;

  /// Face neighbour one step along `axis` (dir = -1 or +1).
  std::optional<CellIndex> neighbor(CellIndex cell, std::size_t axis, int dir) const noexcept;
  CellIndex stride(std::size_t axis) const noexcept { return stride_[axis]; }

  /// True when the cell touches the box boundary.
  bool on_boundary(CellIndex cell) const noexcept;

  bool operator==(const CellGrid& other) const noexcept {
    return box_ == other.box_ && resolution_ == other.resolution_;
  }

 private:
  Box box_;
  std::vector<std::size_t> resolution_;
  std::vector<double> size_;
  std::vector<CellIndex> stride_;
  CellIndex count_ = 0;
};

/// One axis of an image lattice: `count` equal cells partitioning [lo, hi].
/// The lattice value of a cell is its midpoint.
struct LatticeAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 1;

  double width() const noexcept { return (hi - lo) / static_cast<double>(count); }
  double value(std::size_t k) const noexcept {
    return lo + (hi - lo) * static_cast<double>(2 * k + 1) / static_cast<double>(2 * count);
  }
  /// Half-open [lo, hi); the value hi itself belongs to the last cell.
  std::optional<std::size_t> cell_of(double v) const noexcept;
};

/// Rectangular lattice of image cells over R^n, axis 0 varying fastest.
class ImageLattice {
 public:
  ImageLattice() = default;
  explicit ImageLattice(std::vector<LatticeAxis> axes);

  /// "lo:hi:count" per axis, axes separated by commas.
  static ImageLattice parse(std::string_view spec);

  std::size_t dim() const noexcept { return axes_.size(); }
  const LatticeAxis& axis(std::size_t k) const { return axes_.at(k); }
  const std::vector<LatticeAxis>& axes() const noexcept { return axes_; }
  std::size_t size() const noexcept { return size_; }

  Point value(std::size_t cell) const;
  std::optional<std::size_t> cell_of(std::span<const double> y) const noexcept;
  std::vector<std::size_t> coords(std::size_t cell) const;
  /// Lattice cells whose multi-indices differ by at most one on every axis.
  bool adjacent(std::size_t a, std::size_t b) const noexcept;

  std::string to_string() const;

 private:
  std::vector<LatticeAxis> axes_;
  std::size_t size_ = 0;
};

/// Disjoint sets with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);

  std::size_t find(std::size_t x) noexcept;
  /// Returns true when two distinct sets were merged.
  bool unite(std::size_t a, std::size_t b) noexcept;
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> weight_;
};

}  // namespace intsys
