#include "intsys/dspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace intsys::dspace {

using expr::Expr;

std::optional<std::size_t> OrbitSpace::pi(CellIndex cell) const noexcept {
  auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return std::nullopt;
  return projection[static_cast<std::size_t>(it - cells.begin())];
}

OrbitSpace build_orbit_space(const hamsys::IntegrableSystem& sys, const ImageLattice& lattice,
                             const CellGrid& grid, fiber::Connectivity connectivity) {
  if (lattice.dim() != static_cast<std::size_t>(sys.dof())) {
    throw InvalidArgument("image lattice must have n axes");
  }
  if (grid.dim() != sys.dimension()) throw InvalidArgument("grid dimension must be 2n");

  OrbitSpace os{sys, lattice, grid, connectivity, {}, {}, {}, {}, std::vector<bool>(lattice.size(), false), 0, 0};

  // Slab membership of every cell whose F(center) falls inside the lattice.
  std::vector<std::size_t> slab_of;
  std::map<std::size_t, std::vector<CellIndex>> slabs;
  Point x(sys.dimension());
  for (CellIndex cell = 0; cell < grid.cell_count(); ++cell) {
    grid.center(cell, x);
    auto y = sys.try_values(x);
    if (!y) {
      ++os.domain_errors;
      continue;
    }
    auto k = lattice.cell_of(*y);
    if (!k) continue;
    os.cells.push_back(cell);
    slab_of.push_back(*k);
    slabs[*k].push_back(cell);
    if (auto jac = sys.try_jacobian(x)) {
      for (std::size_t i = 0; i < lattice.dim(); ++i) {
        double s = 0.0;
        for (std::size_t a = 0; a < grid.dim(); ++a) {
          const double v = (*jac)[i * grid.dim() + a] * grid.cell_size(a);
          s += v * v;
        }
        if (std::sqrt(s) > lattice.axis(i).width()) {
          ++os.thin_cells;
          break;
        }
      }
    }
  }

  // Components per slab; labels ordered by (lattice cell, representative).
  std::map<std::size_t, std::pair<std::size_t, fiber::ComponentLabeling>> per_slab;
  for (auto& [k, members] : slabs) {
    auto lab = fiber::connected_components(grid, members, connectivity);
    std::size_t offset = os.labels.size();
    for (std::size_t c = 0; c < lab.count(); ++c) {
      os.labels.push_back({k, static_cast<int>(c), lab.representatives[c], lab.sizes[c]});
    }
    per_slab.emplace(k, std::make_pair(offset, std::move(lab)));
  }

  os.projection.resize(os.cells.size());
  for (std::size_t a = 0; a < os.cells.size(); ++a) {
    const auto& [offset, lab] = per_slab.at(slab_of[a]);
    os.projection[a] = offset + static_cast<std::size_t>(*lab.label_of(os.cells[a]));
  }

  // Labels are adjacent when their slabs meet across a phase-cell face.
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < os.cells.size(); ++a) {
    for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
      auto nb = grid.neighbor(os.cells[a], axis, +1);
      if (!nb) continue;
      auto it = std::lower_bound(os.cells.begin(), os.cells.end(), *nb);
      if (it == os.cells.end() || *it != *nb) continue;
      auto b = static_cast<std::size_t>(it - os.cells.begin());
      if (slab_of[a] == slab_of[b] || !lattice.adjacent(slab_of[a], slab_of[b])) continue;
      auto la = os.projection[a];
      auto lb = os.projection[b];
      edges.emplace(std::min(la, lb), std::max(la, lb));
    }
  }
  os.edges.assign(edges.begin(), edges.end());

  for (CellIndex cell : fiber::near_critical_cells(sys, grid)) {
    grid.center(cell, x);
    if (auto y = sys.try_values(x)) {
      if (auto k = lattice.cell_of(*y)) os.critical[*k] = true;
    }
  }
  return os;
}

FactorizationResult check_factorization(const OrbitSpace& os) {
  FactorizationResult result;
  if (os.projection.size() != os.cells.size()) {
    result.pass = false;
    return result;
  }
  Point x(os.grid.dim());
  for (std::size_t a = 0; a < os.cells.size(); ++a) {
    ++result.checked;
    os.grid.center(os.cells[a], x);
    auto y = os.system.try_values(x);
    std::optional<std::size_t> k = y ? os.lattice.cell_of(*y) : std::nullopt;
    const std::size_t label = os.projection[a];
    bool ok = k && label < os.labels.size() && os.labels[label].lattice_cell == *k &&
              os.mu(label) == os.lattice.value(*k);
    if (!ok) {
      result.pass = false;
      result.counterexample = os.cells[a];
      return result;
    }
  }
  return result;
}

MuVerdict mu_bijectivity_test(const OrbitSpace& os) {
  MuVerdict verdict;
  std::map<std::size_t, std::size_t> per_cell;
  for (const auto& label : os.labels) ++per_cell[label.lattice_cell];
  for (const auto& [k, count] : per_cell) {
    if (count >= 2) verdict.witnesses.push_back({k, os.lattice.value(k), count});
  }
  verdict.bijective = verdict.witnesses.empty();
  return verdict;
}

GraphSummary summarize_base_graph(const OrbitSpace& os) {
  GraphSummary s;
  s.vertices = os.labels.size();
  s.edges = os.edges.size();
  std::vector<std::size_t> degree(s.vertices, 0);
  DisjointSets sets(s.vertices);
  for (const auto& [a, b] : os.edges) {
    ++degree[a];
    ++degree[b];
    sets.unite(a, b);
  }
  for (std::size_t v = 0; v < s.vertices; ++v) {
    if (sets.find(v) == v) ++s.components;
    if (degree[v] == 1) ++s.leaves;
    if (degree[v] >= 3) ++s.branch_vertices;
    s.max_degree = std::max(s.max_degree, degree[v]);
  }
  return s;
}

// ---------------------------------------------------------------------------

FunctionRingPresentation::FunctionRingPresentation(const hamsys::IntegrableSystem& sys,
                                                   std::vector<Expr> extra, std::size_t count,
                                                   double tol, std::uint64_t seed)
    : system_(sys), generators_(sys.integrals()) {
  for (std::size_t j = 0; j < extra.size(); ++j) {
    auto verdict = hamsys::commutant_test(sys, extra[j], count, tol, mix_seed(seed, j));
    if (!verdict.member) {
      throw InvalidArgument("generator " + std::to_string(j + 1) + " does not Poisson-commute with f" +
                            std::to_string(*verdict.failing_index + 1));
    }
    generators_.push_back(std::move(extra[j]));
  }
}

Expr FunctionRingPresentation::compose(std::string_view outer) const {
  const std::size_t k = generators_.size();
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= k; ++j) names.push_back("y" + std::to_string(j));
  if (k % 2) names.push_back("__unused");  // variable lists hold 2n names
  expr::VariableList vars(names, static_cast<int>(names.size() / 2));
  Expr g = expr::parse(outer, vars);
  std::vector<Expr> replacements = generators_;
  replacements.resize(names.size(), Expr::constant(0.0));
  return expr::simplify(expr::substitute(g, replacements));
}

hamsys::CommutantVerdict FunctionRingPresentation::membership(const Expr& g, std::size_t count,
                                                              double tol, std::uint64_t seed) const {
  return hamsys::commutant_test(system_, g, count, tol, seed);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Equivalence e) noexcept {
  switch (e) {
    case Equivalence::Equivalent: return "equivalent";
    case Equivalence::NotEquivalent: return "not-equivalent";
    case Equivalence::Inconclusive: return "inconclusive";
  }
  return "?";
}

EquivalenceVerdict systems_equivalent(const hamsys::IntegrableSystem& f, const hamsys::IntegrableSystem& g,
                                      const CellGrid& grid, const EquivalenceOptions& options) {
  if (f.dof() != g.dof()) throw InvalidArgument("systems must have the same number of degrees of freedom");
  if (!(f.box() == g.box())) throw InvalidArgument("systems must share the same box");
  if (grid.dim() != f.dimension()) throw InvalidArgument("grid dimension must be 2n");

  EquivalenceVerdict out;
  const std::size_t n = static_cast<std::size_t>(f.dof());
  const std::size_t d = f.dimension();

  // (a) cross-commutation
  auto cross = [&](const hamsys::IntegrableSystem& base, const hamsys::IntegrableSystem& other,
                   bool g_against_f, std::uint64_t stream) -> bool {
    for (std::size_t j = 0; j < n; ++j) {
      auto v = hamsys::commutant_test(base, other.integral(j), options.count, options.tol,
                                      mix_seed(options.seed, stream + j));
      if (v.numeric_only) out.numeric_only = true;
      if (!v.member) {
        out.verdict = Equivalence::NotEquivalent;
        out.bracket = BracketWitness{g_against_f, j, *v.failing_index, v.witness, v.witness_value};
        return false;
      }
    }
    return true;
  };
  if (!cross(f, g, true, 0x1000) || !cross(g, f, false, 0x2000)) return out;

  // (b) tangent distributions agree on cells where both systems have full rank
  Point x(d);
  std::vector<double> stacked(2 * n * d);
  for (CellIndex cell = 0; cell < grid.cell_count(); ++cell) {
    grid.center(cell, x);
    auto jf = f.try_jacobian(x);
    auto jg = g.try_jacobian(x);
    if (!jf || !jg) continue;
    if (hamsys::numerical_rank(*jf, n, d, options.rank_tol) < static_cast<int>(n) ||
        hamsys::numerical_rank(*jg, n, d, options.rank_tol) < static_cast<int>(n)) {
      ++out.rank_deficient_cells;
      continue;
    }
    ++out.compared_cells;
    std::copy(jf->begin(), jf->end(), stacked.begin());
    std::copy(jg->begin(), jg->end(), stacked.begin() + static_cast<std::ptrdiff_t>(n * d));
    if (hamsys::numerical_rank(stacked, 2 * n, d, options.rank_tol) > static_cast<int>(n)) {
      if (!out.mismatch_cell) {
        out.mismatch_cell = cell;
        out.mismatch_point = x;
      }
      ++out.mismatch_cells;
    }
  }
  if (out.mismatch_cells > 0) {
    out.verdict = Equivalence::NotEquivalent;
  } else if (out.compared_cells == 0 || out.rank_deficient_cells > out.compared_cells) {
    out.verdict = Equivalence::Inconclusive;
  } else {
    out.verdict = Equivalence::Equivalent;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Symbolic Jacobian of a map R^{2n} -> R^{2n}, compiled.
class MapJacobian {
 public:
  explicit MapJacobian(std::span<const Expr> phi) : dim_(phi.size()) {
    for (const Expr& c : phi) components_.emplace_back(c);
    for (const Expr& c : phi) {
      for (std::size_t b = 0; b < dim_; ++b) entries_.emplace_back(expr::differentiate(c, static_cast<int>(b)));
    }
  }

  std::optional<Point> apply(std::span<const double> x) const {
    Point y(dim_);
    for (std::size_t a = 0; a < dim_; ++a) {
      auto v = components_[a].try_evaluate(x);
      if (!v) return std::nullopt;
      y[a] = *v;
    }
    return y;
  }

  /// D phi^T J D phi - J, row-major.
  std::optional<std::vector<double>> defect(std::span<const double> x) const {
    std::vector<double> dphi(dim_ * dim_);
    for (std::size_t k = 0; k < dphi.size(); ++k) {
      auto v = entries_[k].try_evaluate(x);
      if (!v) return std::nullopt;
      dphi[k] = *v;
    }
    const std::size_t n = dim_ / 2;
    auto J = [n](std::size_t c, std::size_t e) -> double {
      if (c < n && e == c + n) return 1.0;
      if (c >= n && e + n == c) return -1.0;
      return 0.0;
    };
    std::vector<double> m(dim_ * dim_, 0.0);
    for (std::size_t a = 0; a < dim_; ++a) {
      for (std::size_t b = 0; b < dim_; ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
          // J pairs q_c with p_c
          s += dphi[c * dim_ + a] * dphi[(c + n) * dim_ + b] - dphi[(c + n) * dim_ + a] * dphi[c * dim_ + b];
        }
        m[a * dim_ + b] = s - J(a, b);
      }
    }
    return m;
  }

 private:
  std::size_t dim_;
  std::vector<expr::Program> components_;
  std::vector<expr::Program> entries_;
};

void check_map(std::span<const Expr> phi, std::size_t dim) {
  if (phi.size() != dim) throw InvalidArgument("map needs exactly 2n components");
  for (const Expr& c : phi) {
    if (c.max_variable_index() >= static_cast<int>(dim)) {
      throw InvalidArgument("map component references a variable outside the phase space");
    }
  }
}

}  // namespace

std::vector<double> symplectic_defect_matrix(std::span<const Expr> phi, std::span<const double> x) {
  if (phi.size() % 2 || phi.size() != x.size()) throw InvalidArgument("map needs exactly 2n components");
  MapJacobian jac(phi);
  auto m = jac.defect(x);
  if (!m) {
    for (const Expr& c : phi) (void)expr::evaluate(c, x);
    throw InvalidArgument("map Jacobian is undefined at this point");
  }
  return *m;
}

SymplecticVerdict symplectic_equivalence_check(const hamsys::IntegrableSystem& f,
                                               const hamsys::IntegrableSystem& target,
                                               std::span<const Expr> phi, std::size_t count, double tol,
                                               std::uint64_t seed) {
  if (f.dof() != target.dof()) throw InvalidArgument("systems must have the same number of degrees of freedom");
  if (count < 1) throw InvalidArgument("symplectic check needs at least one sample");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  check_map(phi, f.dimension());

  SymplecticVerdict out;
  MapJacobian jac(phi);
  BoxSampler sampler(f.box(), mix_seed(seed, 0x73796d70ULL));
  for (std::size_t s = 0; s < count; ++s) {
    Point x = sampler();
    auto y = jac.apply(x);
    auto m = jac.defect(x);
    auto fx = f.try_values(x);
    std::optional<Point> gy = y ? target.try_values(*y) : std::nullopt;
    if (!y || !m || !fx || !gy) {
      ++out.domain_errors;
      continue;
    }
    ++out.samples;
    if (!target.box().contains(*y)) ++out.outside_target_box;
    double sd = 0.0;
    for (double v : *m) sd = std::max(sd, std::abs(v));
    double pd = 0.0;
    for (std::size_t i = 0; i < fx->size(); ++i) pd = std::max(pd, std::abs((*fx)[i] - (*gy)[i]));
    out.symplectic_defect = std::max(out.symplectic_defect, sd);
    out.pullback_defect = std::max(out.pullback_defect, pd);
    bool bad = false;
    if (sd > tol) {
      out.symplectic = false;
      bad = true;
    }
    if (pd > tol) {
      out.pullback = false;
      bad = true;
    }
    if (bad && !out.witness) out.witness = x;
  }
  out.pass = out.samples > 0 && out.symplectic && out.pullback;
  return out;
}

std::vector<Expr> compose_maps(std::span<const Expr> phi, std::span<const Expr> psi) {
  std::vector<Expr> out;
  out.reserve(phi.size());
  for (const Expr& c : phi) out.push_back(expr::simplify(expr::substitute(c, psi)));
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ExtremeKind k) noexcept {
  switch (k) {
    case ExtremeKind::Attained: return "attained";
    case ExtremeKind::BoxTruncated: return "box-truncated";
    case ExtremeKind::Approached: return "approached-not-attained";
  }
  return "?";
}

ClosednessReport image_closedness_probe(const hamsys::IntegrableSystem& sys, const CellGrid& grid,
                                        double margin) {
  if (!(margin > 0.0)) throw InvalidArgument("margin must be positive");
  if (grid.dim() != sys.dimension()) throw InvalidArgument("grid dimension must be 2n");
  const std::size_t n = static_cast<std::size_t>(sys.dof());
  ClosednessReport report;

  std::vector<ImageExtreme> lo(n), hi(n);
  bool any = false;
  Point x(sys.dimension());
  for (CellIndex cell = 0; cell < grid.cell_count(); ++cell) {
    grid.center(cell, x);
    auto y = sys.try_values(x);
    if (!y) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!any || (*y)[i] < lo[i].value) lo[i] = {i, false, (*y)[i], (*y)[i], cell, false, ExtremeKind::Attained};
      if (!any || (*y)[i] > hi[i].value) hi[i] = {i, true, (*y)[i], (*y)[i], cell, false, ExtremeKind::Attained};
    }
    any = true;
  }
  if (!any) {
    report.empty = true;
    return report;
  }

  const Point center = sys.box().center();
  auto probe = [&](ImageExtreme& e) {
    e.on_box_boundary = grid.on_boundary(e.cell);
    if (!e.on_box_boundary) return;
    Point start = grid.center(e.cell);
    Point dir(start.size());
    double r0 = 0.0;
    for (std::size_t k = 0; k < dir.size(); ++k) {
      dir[k] = start[k] - center[k];
      r0 += dir[k] * dir[k];
    }
    r0 = std::sqrt(r0);
    const double sign = e.is_max ? 1.0 : -1.0;
    double beyond = -INFINITY;
    double limit = e.value;
    Point p(start.size());
    for (int k = 1; k <= 40; ++k) {
      double scale = std::ldexp(1.0, k);  // distance r0 * 2^k from the center
      for (std::size_t a = 0; a < p.size(); ++a) p[a] = center[a] + scale * dir[a];
      auto v = expr::Program(sys.integral(e.axis)).try_evaluate(p);
      if (!v) break;
      double excess = sign * (*v - e.value);
      if (excess > beyond) {
        beyond = excess;
        limit = *v;
      }
    }
    (void)r0;
    if (beyond > margin) {
      e.kind = ExtremeKind::BoxTruncated;
    } else if (beyond > 0.0) {
      e.kind = ExtremeKind::Approached;
      e.limit = limit;
    } else {
      e.kind = ExtremeKind::Attained;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (ImageExtreme* e : {&lo[i], &hi[i]}) {
      probe(*e);
      report.extremes.push_back(*e);
      if (e->kind == ExtremeKind::Approached) report.suspects.push_back(*e);
    }
  }
  report.closed_in_box = report.suspects.empty();
  return report;
}

}  // namespace intsys::dspace
