#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "intsys/grid.hpp"
#include "intsys/hamsys.hpp"

namespace intsys::flow {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultQuantum = 0.1;
inline constexpr double kEscapeInflation = 0.1;

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

enum class Termination { Completed, Escaped, DomainError };
std::string_view to_string(Termination t) noexcept;

/// Samples of one flow line of X_{f_i}. `elapsed` is |t| and strictly
/// increasing; the signed flow time of sample k is direction * elapsed[k].
struct Trajectory {
  std::size_t field = 0;
  int direction = 1;
  double step = 0.0;  // step actually used (|t_final| split into equal steps)
  std::vector<double> elapsed;
  std::vector<Point> points;
  Termination termination = Termination::Completed;

  bool escaped() const noexcept { return termination == Termination::Escaped; }
  const Point& back() const { return points.back(); }
};

/// Classical RK4 on X_{f_i} from x0 over flow time t_final (either sign)
/// with steps no longer than h. Stops early when the state leaves the system
/// box scaled by 1.1 about its center.
Trajectory integrate_flow(const hamsys::IntegrableSystem& sys, std::size_t field,
                          std::span<const double> x0, double t_final, double h = kDefaultStep);

struct ConservationReport {
  std::vector<double> drift;              // max_t |f_j(x(t)) - f_j(x0)|
  std::vector<bool> expected_conserved;   // {f_j, f_field} tested zero
};

ConservationReport conservation_check(const hamsys::IntegrableSystem& sys, const Trajectory& traj,
                                      std::size_t count = 200, double tol = 1e-10,
                                      std::uint64_t seed = 0);

struct ExploreOptions {
  std::size_t budget = 10000;  // frontier points expanded
  double step = kDefaultStep;
  double quantum = kDefaultQuantum;
};

struct OrbitMove {
  std::size_t parent;  // index into OrbitSample::frontier_points
  std::size_t field;
  double time;         // +quantum or -quantum
};

struct OrbitSample {
  Point seed;
  /// One representative point per visited dedup cell, ordered by cell index.
  std::vector<Point> cloud;
  std::vector<CellIndex> cells;
  /// Points that started a new exploration branch, in discovery order; the
  /// seed is entry 0 and entry k > 0 was produced by log[k - 1].
  std::vector<Point> frontier_points;
  std::vector<OrbitMove> log;
  std::size_t budget_used = 0;
  bool closed = false;  // frontier exhausted before the budget ran out
  std::size_t escaped_branches = 0;
  std::vector<Point> escape_points;  // first few points found outside the box
  /// max over the cloud of |F(x) - F(seed)|_inf
  double value_drift = 0.0;
};

/// Breadth-first composition of the local flows of every X_{f_i} for
/// +/- quantum, deduplicated on the cells of `dedup`.
OrbitSample orbit_explore(const hamsys::IntegrableSystem& sys, std::span<const double> x0,
                          const CellGrid& dedup, const ExploreOptions& options = {});

/// Dimension of the orbit through x: span of {X_{f_i}(x)}, equal to rank DF(x).
int orbit_dimension(const hamsys::IntegrableSystem& sys, std::span<const double> x,
                    double tol = hamsys::kDefaultRankTol);

enum class EscapeClass { Bounded, Linear, Superlinear, BlowUp };
std::string_view to_string(EscapeClass c) noexcept;

struct EscapeRecord {
  Point seed;
  std::size_t field = 0;
  int direction = 1;
  EscapeClass kind = EscapeClass::Bounded;
  double escape_time = 0.0;  // first |t| beyond the escape radius
  double final_norm = 0.0;
  double speed_ratio = 1.0;  // |X| at the end / |X| at escape
};

struct ProbeOptions {
  double step = 1e-2;
  double inflation = 2.0;       // escape radius = inflation * box radius
  double speed_growth = 2.0;    // speed_ratio above this is super-linear
  std::uint64_t seed = 0;
};

struct CompletenessReport {
  std::size_t trials = 0;
  double horizon = 0.0;
  std::vector<EscapeRecord> witnesses;  // super-linear or blow-up
  std::vector<EscapeRecord> linear_escapes;
  std::size_t bounded = 0;

  bool blow_up_suspected() const noexcept { return !witnesses.empty(); }
  static constexpr std::string_view kCaveat =
      "heuristic: absence of escape witnesses does not prove completeness";
};

/// Integrates each X_{f_i} from random seeds to +/- horizon without box
/// truncation and classifies how the state leaves a ball around the box.
CompletenessReport completeness_probe(const hamsys::IntegrableSystem& sys, std::size_t trials,
                                      double horizon, const ProbeOptions& options = {});

}  // namespace intsys::flow
