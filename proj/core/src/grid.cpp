#include "intsys/grid.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <system_error>

namespace intsys {

CellGrid::CellGrid(Box box, std::vector<std::size_t> resolution)
    : box_(std::move(box)), resolution_(std::move(resolution)) {
  if (resolution_.size() != box_.dim()) {
    throw InvalidArgument("grid needs one resolution per box axis");
  }
  count_ = 1;
  for (std::size_t k = 0; k < resolution_.size(); ++k) {
    if (resolution_[k] < 2) throw InvalidArgument("grid resolution must be at least 2 per axis");
    stride_.push_back(count_);
    if (count_ > kMaxCells / resolution_[k]) {
      throw InvalidArgument("grid has too many cells (limit 2^32); lower the resolution");
    }
    count_ *= resolution_[k];
    size_.push_back(box_.width(k) / static_cast<double>(resolution_[k]));
  }
}

CellGrid CellGrid::uniform(Box box, std::size_t resolution) {
  std::vector<std::size_t> res(box.dim(), resolution);
  return CellGrid(std::move(box), std::move(res));
}

double CellGrid::cell_diagonal() const noexcept {
  double s = 0.0;
  for (double h : size_) s += h * h;
  return std::sqrt(s);
}

std::optional<CellIndex> CellGrid::locate(std::span<const double> x) const noexcept {
  if (x.size() != dim()) return std::nullopt;
  CellIndex cell = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double lo = box_.lo(k);
    double hi = box_.hi(k);
    if (!(x[k] >= lo && x[k] <= hi)) return std::nullopt;
    auto i = static_cast<std::size_t>((x[k] - lo) / size_[k]);
    if (i >= resolution_[k]) i = resolution_[k] - 1;
    cell += stride_[k] * i;
  }
  return cell;
}

void CellGrid::center(CellIndex cell, std::span<double> out) const noexcept {
  for (std::size_t k = 0; k < dim(); ++k) {
    auto i = static_cast<double>((cell / stride_[k]) % resolution_[k]);
    out[k] = box_.lo(k) + (i + 0.5) * size_[k];
  }
}

Point CellGrid::center(CellIndex cell) const {
  Point c(dim());
  center(cell, c);
  return c;
}

void CellGrid::coords(CellIndex cell, std::span<std::size_t> out) const noexcept {
  for (std::size_t k = 0; k < dim(); ++k) out[k] = static_cast<std::size_t>((cell / stride_[k]) % resolution_[k]);
}

CellIndex CellGrid::index(std::span<const std::size_t> coords) const noexcept {
  CellIndex cell = 0;
  for (std::size_t k = 0; k < dim(); ++k) cell += stride_[k] * coords[k];
  return cell;
}

std::optional<CellIndex> CellGrid::neighbor(CellIndex cell, std::size_t axis, int dir) const noexcept {
  auto i = (cell / stride_[axis]) % resolution_[axis];
  if (dir < 0) {
    if (i == 0) return std::nullopt;
    return cell - stride_[axis];
  }
  if (i + 1 >= resolution_[axis]) return std::nullopt;
  return cell + stride_[axis];
}

bool CellGrid::on_boundary(CellIndex cell) const noexcept {
  for (std::size_t k = 0; k < dim(); ++k) {
    auto i = (cell / stride_[k]) % resolution_[k];
    if (i == 0 || i + 1 == resolution_[k]) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> LatticeAxis::cell_of(double v) const noexcept {
  if (!(v >= lo && v <= hi)) return std::nullopt;
  auto k = static_cast<std::size_t>((v - lo) / width());
  if (k >= count) k = count - 1;
  return k;
}

ImageLattice::ImageLattice(std::vector<LatticeAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidArgument("image lattice needs at least one axis");
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.count < 1) throw InvalidArgument("image lattice axis needs at least one cell");
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.lo < a.hi)) {
      throw InvalidArgument("image lattice axis needs lo < hi");
    }
    size_ *= a.count;
  }
}

namespace {

double parse_double(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("malformed " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

ImageLattice ImageLattice::parse(std::string_view spec) {
  std::vector<LatticeAxis> axes;
  while (true) {
    auto comma = spec.find(',');
    std::string_view part = spec.substr(0, comma);
    auto c1 = part.find(':');
    auto c2 = c1 == std::string_view::npos ? c1 : part.find(':', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw InvalidArgument("lattice axis must look like lo:hi:count, got '" + std::string(part) + "'");
    }
    LatticeAxis axis;
    axis.lo = parse_double(part.substr(0, c1), "lattice bound");
    axis.hi = parse_double(part.substr(c1 + 1, c2 - c1 - 1), "lattice bound");
    double count = parse_double(part.substr(c2 + 1), "lattice count");
    if (count < 1 || count != std::floor(count)) throw InvalidArgument("lattice count must be a positive integer");
    axis.count = static_cast<std::size_t>(count);
    axes.push_back(axis);
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  return ImageLattice(std::move(axes));
}

Point ImageLattice::value(std::size_t cell) const {
  Point y(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    y[k] = axes_[k].value(cell % axes_[k].count);
    cell /= axes_[k].count;
  }
  return y;
}

std::optional<std::size_t> ImageLattice::cell_of(std::span<const double> y) const noexcept {
  if (y.size() != axes_.size()) return std::nullopt;
  std::size_t cell = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    auto c = axes_[k].cell_of(y[k]);
    if (!c) return std::nullopt;
    cell += stride * *c;
    stride *= axes_[k].count;
  }
  return cell;
}

std::vector<std::size_t> ImageLattice::coords(std::size_t cell) const {
  std::vector<std::size_t> out(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    out[k] = cell % axes_[k].count;
    cell /= axes_[k].count;
  }
  return out;
}

bool ImageLattice::adjacent(std::size_t a, std::size_t b) const noexcept {
  if (a == b) return false;
  for (const auto& axis : axes_) {
    auto ia = a % axis.count;
    auto ib = b % axis.count;
    if ((ia > ib ? ia - ib : ib - ia) > 1) return false;
    a /= axis.count;
    b /= axis.count;
  }
  return true;
}

std::string ImageLattice::to_string() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (k) out << ',';
    out << axes_[k].lo << ':' << axes_[k].hi << ':' << axes_[k].count;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

DisjointSets::DisjointSets(std::size_t n) : parent_(n), weight_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) noexcept {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) noexcept {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (weight_[a] < weight_[b]) std::swap(a, b);
  parent_[b] = a;
  weight_[a] += weight_[b];
  return true;
}

}  // namespace intsys
