#include "intsys/fiber.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>

namespace intsys::fiber {

bool FiberSample::contains(CellIndex cell) const noexcept {
  return std::binary_search(marked.begin(), marked.end(), cell);
}

FiberSample sample_fiber(const hamsys::IntegrableSystem& sys, std::span<const double> target,
                         const CellGrid& grid, double atol, double band_factor) {
  const std::size_t n = static_cast<std::size_t>(sys.dof());
  const std::size_t d = sys.dimension();
  if (target.size() != n) throw InvalidArgument("fiber value must have n components");
  if (!(atol > 0.0)) throw InvalidArgument("fiber tolerance must be positive");
  if (grid.dim() != d) throw InvalidArgument("grid dimension must be 2n");

  FiberSample fs{grid, Point(target.begin(), target.end()), atol, band_factor, {}, 0};
  const auto& h = grid.cell_sizes();
  Point x(d);
  for (CellIndex cell = 0; cell < grid.cell_count(); ++cell) {
    grid.center(cell, x);
    auto v = sys.try_values(x);
    if (!v) {
      ++fs.domain_errors;
      continue;
    }
    bool inside = true;
    bool need_gradient = false;
    for (std::size_t i = 0; i < n && inside; ++i) {
      double diff = std::abs((*v)[i] - target[i]);
      if (diff > atol) need_gradient = true;
      if (!std::isfinite(diff)) inside = false;
    }
    if (!inside) continue;
    if (need_gradient) {
      auto jac = sys.try_jacobian(x);
      if (!jac) {
        ++fs.domain_errors;
        continue;
      }
      for (std::size_t i = 0; i < n && inside; ++i) {
        double diff = std::abs((*v)[i] - target[i]);
        if (diff <= atol) continue;
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          double g = h[k] * (*jac)[i * d + k];
          s += g * g;
        }
        if (diff > std::max(atol, band_factor * std::sqrt(s))) inside = false;
      }
    }
    if (inside) fs.marked.push_back(cell);
  }
  return fs;
}

std::optional<int> ComponentLabeling::label_of(CellIndex cell) const noexcept {
  auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return std::nullopt;
  return labels[static_cast<std::size_t>(it - cells.begin())];
}

namespace {

/// Offsets (in linear index space) to neighbours with a larger index,
/// together with the per-axis steps needed to check grid bounds.
struct NeighborStencil {
  std::vector<std::vector<int>> steps;
};

NeighborStencil make_stencil(std::size_t dim, Connectivity connectivity) {
  NeighborStencil st;
  if (connectivity == Connectivity::Face) {
    for (std::size_t k = 0; k < dim; ++k) {
      std::vector<int> s(dim, 0);
      s[k] = 1;
      st.steps.push_back(std::move(s));
    }
    return st;
  }
  // Corner: every offset in {-1,0,1}^dim whose last non-zero entry is +1,
  // i.e. the half of the Moore neighbourhood with a larger linear index.
  std::vector<int> s(dim, -1);
  for (;;) {
    int last = 0;
    for (std::size_t k = dim; k-- > 0;) {
      if (s[k] != 0) {
        last = s[k];
        break;
      }
    }
    if (last == 1) st.steps.push_back(s);
    std::size_t k = 0;
    while (k < dim && s[k] == 1) s[k++] = -1;
    if (k == dim) break;
    ++s[k];
  }
  return st;
}

}  // namespace

ComponentLabeling connected_components(const CellGrid& grid, std::span<const CellIndex> marked,
                                       Connectivity connectivity) {
  ComponentLabeling lab;
  lab.connectivity = connectivity;
  lab.cells.assign(marked.begin(), marked.end());
  if (!std::is_sorted(lab.cells.begin(), lab.cells.end())) std::sort(lab.cells.begin(), lab.cells.end());
  lab.cells.erase(std::unique(lab.cells.begin(), lab.cells.end()), lab.cells.end());

  const std::size_t m = lab.cells.size();
  const std::size_t dim = grid.dim();
  DisjointSets sets(m);
  NeighborStencil stencil = make_stencil(dim, connectivity);
  std::vector<std::size_t> coords(dim);
  for (std::size_t a = 0; a < m; ++a) {
    grid.coords(lab.cells[a], coords);
    for (const auto& step : stencil.steps) {
      bool valid = true;
      long long offset = 0;
      for (std::size_t k = 0; k < dim && valid; ++k) {
        long long c = static_cast<long long>(coords[k]) + step[k];
        if (c < 0 || c >= static_cast<long long>(grid.resolution(k))) valid = false;
        offset += step[k] * static_cast<long long>(grid.stride(k));
      }
      if (!valid) continue;
      CellIndex other = lab.cells[a] + static_cast<CellIndex>(offset);
      auto it = std::lower_bound(lab.cells.begin() + static_cast<std::ptrdiff_t>(a), lab.cells.end(), other);
      if (it != lab.cells.end() && *it == other) {
        sets.unite(a, static_cast<std::size_t>(it - lab.cells.begin()));
      }
    }
  }

  lab.labels.assign(m, -1);
  std::vector<int> root_label(m, -1);
  for (std::size_t a = 0; a < m; ++a) {
    std::size_t r = sets.find(a);
    if (root_label[r] < 0) {
      root_label[r] = static_cast<int>(lab.representatives.size());
      lab.representatives.push_back(lab.cells[a]);
      lab.sizes.push_back(0);
    }
    lab.labels[a] = root_label[r];
    ++lab.sizes[static_cast<std::size_t>(root_label[r])];
  }
  return lab;
}

ComponentLabeling connected_components(const FiberSample& fs, Connectivity connectivity) {
  return connected_components(fs.grid, fs.marked, connectivity);
}

std::size_t fiber_component_count(const hamsys::IntegrableSystem& sys, std::span<const double> target,
                                  const CellGrid& grid, double atol, Connectivity connectivity) {
  return connected_components(sample_fiber(sys, target, grid, atol), connectivity).count();
}

// ---------------------------------------------------------------------------

namespace {

double smallest_singular_value(const std::vector<double>& jac, std::size_t n, std::size_t d) {
  if (n == 1) {
    double s = 0.0;
    for (double v : jac) s += v * v;
    return std::sqrt(s);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = jac[r * d + c];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(static_cast<Eigen::Index>(n - 1));
}

}  // namespace

std::vector<CellIndex> near_critical_cells(const hamsys::IntegrableSystem& sys, const CellGrid& grid,
                                           double factor) {
  const std::size_t n = static_cast<std::size_t>(sys.dof());
  const std::size_t d = sys.dimension();
  std::vector<expr::Program> hessian;
  hessian.reserve(n * d * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t l = 0; l < d; ++l) {
        hessian.emplace_back(expr::differentiate(sys.gradient(i, k), static_cast<int>(l)));
      }
    }
  }
  const double reach = 0.5 * factor * grid.cell_diagonal();
  std::vector<CellIndex> out;
  Point x(d);
  for (CellIndex cell = 0; cell < grid.cell_count(); ++cell) {
    grid.center(cell, x);
    auto jac = sys.try_jacobian(x);
    if (!jac) continue;
    double h2 = 0.0;
    bool ok = true;
    for (const auto& p : hessian) {
      auto v = p.try_evaluate(x);
      if (!v) {
        ok = false;
        break;
      }
      h2 += *v * *v;
    }
    if (!ok) continue;
    if (smallest_singular_value(*jac, n, d) <= reach * std::sqrt(h2)) out.push_back(cell);
  }
  return out;
}

namespace {

bool intersects(const std::vector<CellIndex>& a, const std::vector<CellIndex>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

BifurcationTable bifurcation_scan(const hamsys::IntegrableSystem& sys, std::span<const Point> values,
                                  const CellGrid& grid, const ScanOptions& options) {
  if (values.empty()) throw InvalidArgument("bifurcation scan needs at least one value");
  auto critical = near_critical_cells(sys, grid, options.critical_factor);
  BifurcationTable table;
  for (const Point& c : values) {
    FiberSample fs = sample_fiber(sys, c, grid, options.atol);
    ScanRow row;
    row.value = c;
    row.count = connected_components(fs, options.connectivity).count();
    row.critical = intersects(fs.marked, critical);
    table.rows.push_back(std::move(row));
  }
  return table;
}

BifurcationTable bifurcation_scan(const hamsys::IntegrableSystem& sys, const ImageLattice& lattice,
                                  const CellGrid& grid, const ScanOptions& options) {
  if (lattice.dim() != static_cast<std::size_t>(sys.dof())) {
    throw InvalidArgument("image lattice must have n axes");
  }
  std::vector<Point> values;
  values.reserve(lattice.size());
  for (std::size_t k = 0; k < lattice.size(); ++k) values.push_back(lattice.value(k));
  BifurcationTable table = bifurcation_scan(sys, std::span<const Point>(values), grid, options);

  Point x(sys.dimension());
  for (CellIndex cell : near_critical_cells(sys, grid, options.critical_factor)) {
    grid.center(cell, x);
    if (auto y = sys.try_values(x)) {
      if (auto k = lattice.cell_of(*y)) table.rows[*k].critical = true;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

OrbitFiberReport orbit_vs_fiber_check(const hamsys::IntegrableSystem& sys, std::span<const double> x0,
                                      std::size_t budget, const CellGrid& grid, double atol,
                                      double step) {
  OrbitFiberReport report;
  Point c = sys.values(x0);
  FiberSample fs = sample_fiber(sys, c, grid, atol);
  ComponentLabeling lab = connected_components(fs);
  report.components = lab.count();

  flow::ExploreOptions opts;
  opts.budget = budget;
  opts.step = step;
  report.orbit = flow::orbit_explore(sys, x0, grid, opts);

  std::set<int> seen;
  std::vector<CellIndex> hit;
  for (CellIndex cell : report.orbit.cells) {
    ++report.cloud_cells;
    auto l = lab.label_of(cell);
    if (!l) {
      ++report.stray_cells;
      continue;
    }
    seen.insert(*l);
    hit.push_back(cell);
  }
  if (seen.size() == 1) report.label = *seen.begin();
  report.containment = report.stray_cells == 0 && seen.size() == 1;
  if (seen.size() > 1) {
    // every cell off the seed's component counts as stray
    auto seed_label = lab.label_of(*grid.locate(x0));
    report.label = seed_label;
    for (CellIndex cell : hit) {
      if (lab.label_of(cell) != seed_label) ++report.stray_cells;
    }
  }
  if (!report.label) return report;

  const int label = *report.label;
  std::erase_if(hit, [&](CellIndex cell) { return lab.label_of(cell) != label; });
  report.hit_cells = hit.size();
  report.component_cells = lab.sizes[static_cast<std::size_t>(label)];
  std::size_t reached = 0;
  for (std::size_t a = 0; a < lab.cells.size(); ++a) {
    if (lab.labels[a] != label) continue;
    CellIndex cell = lab.cells[a];
    bool near = std::binary_search(hit.begin(), hit.end(), cell);
    for (std::size_t k = 0; k < grid.dim() && !near; ++k) {
      for (int dir : {-1, 1}) {
        auto nb = grid.neighbor(cell, k, dir);
        if (nb && std::binary_search(hit.begin(), hit.end(), *nb)) {
          near = true;
          break;
        }
      }
    }
    if (near) ++reached;
  }
  if (report.component_cells > 0) {
    report.direct_coverage = static_cast<double>(report.hit_cells) / static_cast<double>(report.component_cells);
    report.coverage = static_cast<double>(reached) / static_cast<double>(report.component_cells);
  }
  return report;
}

}  // namespace intsys::fiber
