#pragma once

// Discretized orbit space N of an integrable system.
//
// Elements of N are the connected components of the slabs
// F^{-1}(image cell) over an image lattice. pi sends a marked phase cell to
// its component, mu sends a component to the lattice value of its slab, and
// F = mu o pi holds cell by cell.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "intsys/fiber.hpp"
#include "intsys/grid.hpp"
#include "intsys/hamsys.hpp"

namespace intsys::dspace {

struct OrbitLabel {
  std::size_t lattice_cell = 0;
  int component = 0;               // index within the slab
  CellIndex representative = 0;    // smallest phase cell
  std::size_t cells = 0;
};

struct OrbitSpace {
  hamsys::IntegrableSystem system;
  ImageLattice lattice;
  CellGrid grid;
  fiber::Connectivity connectivity = fiber::Connectivity::Face;

  std::vector<OrbitLabel> labels;        // ordered by (lattice cell, representative)
  std::vector<CellIndex> cells;          // marked phase cells, sorted
  std::vector<std::size_t> projection;   // pi, parallel to cells
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // label adjacency, a < b, sorted
  std::vector<bool> critical;            // per lattice cell, near-critical cells present
  std::size_t domain_errors = 0;
  /// Marked cells across which some f_i varies by more than a lattice cell
  /// width (|h (.) grad f_i| > width_i); slabs there may fragment.
  std::size_t thin_cells = 0;

  /// mu(label): the lattice value of the label's slab.
  Point mu(std::size_t label) const { return lattice.value(labels.at(label).lattice_cell); }
  std::optional<std::size_t> pi(CellIndex cell) const noexcept;
  bool empty() const noexcept { return labels.empty(); }
};

OrbitSpace build_orbit_space(const hamsys::IntegrableSystem& sys, const ImageLattice& lattice,
                             const CellGrid& grid,
                             fiber::Connectivity connectivity = fiber::Connectivity::Face);

struct FactorizationResult {
  bool pass = true;
  std::optional<CellIndex> counterexample;
  std::size_t checked = 0;
};

/// Re-evaluates F at every marked cell and compares its lattice cell with mu(pi(cell)).
FactorizationResult check_factorization(const OrbitSpace& os);

struct MuWitness {
  std::size_t lattice_cell = 0;
  Point value;
  std::size_t labels = 0;
};

struct MuVerdict {
  bool bijective = true;  // at resolution; onto nonempty lattice cells
  std::vector<MuWitness> witnesses;
};

MuVerdict mu_bijectivity_test(const OrbitSpace& os);

struct GraphSummary {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t components = 0;
  std::size_t leaves = 0;
  std::size_t branch_vertices = 0;  // degree >= 3
  std::size_t max_degree = 0;

  bool is_tree() const noexcept { return components == 1 && edges + 1 == vertices; }
  bool is_path() const noexcept { return is_tree() && max_degree <= 2; }
  /// Two branches merging once into a third.
  bool is_y_shaped() const noexcept {
    return is_tree() && branch_vertices == 1 && max_degree == 3 && leaves == 3;
  }
};

GraphSummary summarize_base_graph(const OrbitSpace& os);

// ---------------------------------------------------------------------------

/// Generator-presented function ring: the integrals f_i plus optional extra
/// commutant generators. Ring elements are expressions G(g_1..g_k).
class FunctionRingPresentation {
 public:
  /// Throws InvalidArgument when an extra generator fails the commutant test.
  FunctionRingPresentation(const hamsys::IntegrableSystem& sys, std::vector<expr::Expr> extra = {},
                           std::size_t count = 200, double tol = 1e-9, std::uint64_t seed = 0);

  const std::vector<expr::Expr>& generators() const noexcept { return generators_; }

  /// Substitutes the generators for y1..yk in an expression written over
  /// variables named y1..yk.
  expr::Expr compose(std::string_view outer) const;

  /// Commutant membership for an arbitrary expression.
  hamsys::CommutantVerdict membership(const expr::Expr& g, std::size_t count = 200,
                                      double tol = 1e-9, std::uint64_t seed = 0) const;

 private:
  hamsys::IntegrableSystem system_;
  std::vector<expr::Expr> generators_;
};

// ---------------------------------------------------------------------------

enum class Equivalence { Equivalent, NotEquivalent, Inconclusive };
std::string_view to_string(Equivalence e) noexcept;

struct BracketWitness {
  bool g_against_f = true;   // {g_j, f_i} (true) or {f_i, g_j} tested against G
  std::size_t tested = 0;    // j or i of the tested function
  std::size_t against = 0;   // i or j of the integral it failed against
  Point point;
  double value = 0.0;
};

struct EquivalenceVerdict {
  Equivalence verdict = Equivalence::Inconclusive;
  std::optional<BracketWitness> bracket;
  std::optional<CellIndex> mismatch_cell;
  std::optional<Point> mismatch_point;
  std::size_t compared_cells = 0;
  std::size_t mismatch_cells = 0;
  std::size_t rank_deficient_cells = 0;
  bool numeric_only = false;
  std::string qualifier = "at resolution and sampling";
};

struct EquivalenceOptions {
  std::size_t count = 200;
  double tol = 1e-9;
  double rank_tol = 1e-6;
  std::uint64_t seed = 0;
};

/// (a) cross-commutation of every g_j with F and every f_i with G;
/// (b) on grid cells where both DF and DG have full rank, the row spaces of
///     DF and DG coincide (rank of the stacked Jacobian is n), i.e. the
///     families X_F and X_G span the same tangent distribution there.
EquivalenceVerdict systems_equivalent(const hamsys::IntegrableSystem& f,
                                      const hamsys::IntegrableSystem& g, const CellGrid& grid,
                                      const EquivalenceOptions& options = {});

struct SymplecticVerdict {
  bool pass = false;
  bool symplectic = true;  // D phi^T J D phi = J at all samples
  bool pullback = true;    // f_i = f'_i o phi at all samples
  double symplectic_defect = 0.0;
  double pullback_defect = 0.0;
  std::optional<Point> witness;
  std::size_t samples = 0;
  std::size_t domain_errors = 0;
  std::size_t outside_target_box = 0;
};

/// phi is given by its 2n components over the canonical variables.
SymplecticVerdict symplectic_equivalence_check(const hamsys::IntegrableSystem& f,
                                               const hamsys::IntegrableSystem& target,
                                               std::span<const expr::Expr> phi, std::size_t count,
                                               double tol, std::uint64_t seed = 0);

/// D phi^T J D phi - J at x, row-major 2n x 2n.
std::vector<double> symplectic_defect_matrix(std::span<const expr::Expr> phi,
                                             std::span<const double> x);

/// phi o psi (first psi, then phi), componentwise.
std::vector<expr::Expr> compose_maps(std::span<const expr::Expr> phi, std::span<const expr::Expr> psi);

// ---------------------------------------------------------------------------

enum class ExtremeKind { Attained, BoxTruncated, Approached };
std::string_view to_string(ExtremeKind k) noexcept;

struct ImageExtreme {
  std::size_t axis = 0;
  bool is_max = false;
  double value = 0.0;        // sampled extreme
  double limit = 0.0;        // probe estimate of the value approached
  CellIndex cell = 0;
  bool on_box_boundary = false;
  ExtremeKind kind = ExtremeKind::Attained;
};

struct ClosednessReport {
  bool closed_in_box = true;
  bool empty = false;
  std::vector<ImageExtreme> extremes;
  std::vector<ImageExtreme> suspects;  // kind == Approached; all box-limited
  static constexpr std::string_view kCaveat =
      "heuristic, box-limited, non-conclusive: only per-axis extremes of the sampled image are probed";
};

/// For each image axis, finds the extreme values over cell centers. An
/// extreme on the box boundary is followed outward along the ray from the box
/// center: values moving past it by more than `margin` mean the box truncates
/// the image; values staying within `margin` while still moving toward it
/// mark a suspect value that is approached but not attained.
ClosednessReport image_closedness_probe(const hamsys::IntegrableSystem& sys, const CellGrid& grid,
                                        double margin = 1e-6);

}  // namespace intsys::dspace
