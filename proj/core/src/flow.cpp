#include "intsys/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace intsys::flow {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::Escaped: return "escaped";
    case Termination::DomainError: return "domain-error";
  }
  return "?";
}

std::string_view to_string(EscapeClass c) noexcept {
  switch (c) {
    case EscapeClass::Bounded: return "bounded";
    case EscapeClass::Linear: return "linear-escape";
    case EscapeClass::Superlinear: return "super-linear-escape";
    case EscapeClass::BlowUp: return "blow-up";
  }
  return "?";
}

namespace {

/// Classical fourth-order Runge-Kutta on one Hamiltonian vector field.
class Rk4 {
 public:
  Rk4(const hamsys::IntegrableSystem& sys, std::size_t field)
      : sys_(sys), field_(field), k1_(sys.dimension()), k2_(k1_), k3_(k1_), k4_(k1_), tmp_(k1_), carry_(k1_) {}

  /// Starts a new trajectory (clears the summation carry).
  void reset() { std::fill(carry_.begin(), carry_.end(), 0.0); }

  /// Advances x by signed step h. False on a domain error (x unchanged).
  bool step(std::span<double> x, double h) {
    const std::size_t d = x.size();
    if (!sys_.try_vector_field(field_, x, k1_)) return false;
    for (std::size_t k = 0; k < d; ++k) tmp_[k] = x[k] + 0.5 * h * k1_[k];
    if (!sys_.try_vector_field(field_, tmp_, k2_)) return false;
    for (std::size_t k = 0; k < d; ++k) tmp_[k] = x[k] + 0.5 * h * k2_[k];
    if (!sys_.try_vector_field(field_, tmp_, k3_)) return false;
    for (std::size_t k = 0; k < d; ++k) tmp_[k] = x[k] + h * k3_[k];
    if (!sys_.try_vector_field(field_, tmp_, k4_)) return false;
    // Kahan-compensated x += increment
    for (std::size_t k = 0; k < d; ++k) {
      const double inc = (h / 6.0) * (k1_[k] + 2.0 * k2_[k] + 2.0 * k3_[k] + k4_[k]) - carry_[k];
      tmp_[k] = x[k] + inc;
      if (!std::isfinite(tmp_[k])) return false;
      k1_[k] = (tmp_[k] - x[k]) - inc;
    }
    std::copy(tmp_.begin(), tmp_.end(), x.begin());
    std::copy(k1_.begin(), k1_.end(), carry_.begin());
    return true;
  }

  /// |X_f(x)|, or NaN on a domain error.
  double speed(std::span<const double> x) {
    if (!sys_.try_vector_field(field_, x, k1_)) return std::nan("");
    double s = 0.0;
    for (double v : k1_) s += v * v;
    return std::sqrt(s);
  }

 private:
  const hamsys::IntegrableSystem& sys_;
  std::size_t field_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_, carry_;
};

/// Number of equal steps of length <= h covering |span|.
std::size_t step_count(double span, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("step size must be positive and finite");
  if (!std::isfinite(span)) throw InvalidArgument("integration time must be finite");
  if (span == 0.0) return 0;
  double n = std::ceil(std::abs(span) / h * (1.0 - 1e-12));
  if (n > 1e9) throw StepUnderflow("step size too small for the requested time span");
  auto steps = static_cast<std::size_t>(std::max(n, 1.0));
  double h_eff = std::abs(span) / static_cast<double>(steps);
  if (!(h_eff > 0.0) || h_eff < std::abs(span) * 1e-15) {
    throw StepUnderflow("step size underflows relative to the time span");
  }
  return steps;
}

void check_point(const hamsys::IntegrableSystem& sys, std::span<const double> x) {
  if (x.size() != sys.dimension()) throw InvalidArgument("phase point must have length 2n");
}

double norm_from(std::span<const double> x, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
  return std::sqrt(s);
}

}  // namespace

Trajectory integrate_flow(const hamsys::IntegrableSystem& sys, std::size_t field,
                          std::span<const double> x0, double t_final, double h) {
  check_point(sys, x0);
  if (field >= static_cast<std::size_t>(sys.dof())) throw InvalidArgument("field index out of range");
  if (!sys.box().contains(x0)) throw InvalidArgument("initial point lies outside the system box");
  const std::size_t steps = step_count(t_final, h);

  // Surface domain errors at the initial point with the failing subexpression.
  sys.values(x0);
  sys.jacobian(x0);

  Trajectory traj;
  traj.field = field;
  traj.direction = t_final < 0.0 ? -1 : 1;
  traj.step = steps ? std::abs(t_final) / static_cast<double>(steps) : 0.0;
  traj.elapsed.reserve(steps + 1);
  traj.points.reserve(steps + 1);
  traj.elapsed.push_back(0.0);
  traj.points.emplace_back(x0.begin(), x0.end());

  const Box limit = sys.box().inflated(kEscapeInflation);
  const double signed_h = traj.direction * traj.step;
  Rk4 rk(sys, field);
  Point x(x0.begin(), x0.end());
  for (std::size_t s = 1; s <= steps; ++s) {
    if (!rk.step(x, signed_h)) {
      traj.termination = Termination::DomainError;
      break;
    }
    traj.elapsed.push_back(s == steps ? std::abs(t_final) : static_cast<double>(s) * traj.step);
    traj.points.push_back(x);
    if (!limit.contains(x)) {
      traj.termination = Termination::Escaped;
      break;
    }
  }
  return traj;
}

ConservationReport conservation_check(const hamsys::IntegrableSystem& sys, const Trajectory& traj,
                                      std::size_t count, double tol, std::uint64_t seed) {
  if (traj.points.empty()) throw InvalidArgument("trajectory is empty");
  const std::size_t n = static_cast<std::size_t>(sys.dof());
  ConservationReport report;
  report.drift.assign(n, 0.0);
  report.expected_conserved.assign(n, false);

  Point start = sys.values(traj.points.front());
  for (const Point& x : traj.points) {
    Point v = sys.values(x);
    for (std::size_t j = 0; j < n; ++j) report.drift[j] = std::max(report.drift[j], std::abs(v[j] - start[j]));
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto bracket = hamsys::poisson_bracket(sys.integral(j), sys.integral(traj.field), sys.dof());
    BoxSampler sampler(sys.box(), mix_seed(seed, j));
    try {
      report.expected_conserved[j] = expr::is_identically_zero(bracket, std::ref(sampler), count, tol).is_zero();
    } catch (const InconclusiveError&) {
      report.expected_conserved[j] = false;
    }
  }
  return report;
}

OrbitSample orbit_explore(const hamsys::IntegrableSystem& sys, std::span<const double> x0,
                          const CellGrid& dedup, const ExploreOptions& options) {
  check_point(sys, x0);
  if (options.budget < 1) throw InvalidArgument("exploration budget must be at least 1");
  if (!(options.quantum > 0.0)) throw InvalidArgument("time quantum must be positive");
  auto start_cell = dedup.locate(x0);
  if (!start_cell || !sys.box().contains(x0)) throw InvalidArgument("seed point lies outside the box");
  sys.values(x0);

  constexpr std::size_t kMaxEscapePoints = 32;
  const std::size_t steps = step_count(options.quantum, options.step);
  const double h = options.quantum / static_cast<double>(steps);
  const std::size_t n = static_cast<std::size_t>(sys.dof());

  OrbitSample sample;
  sample.seed.assign(x0.begin(), x0.end());
  sample.frontier_points.push_back(sample.seed);

  std::unordered_map<CellIndex, Point> visited;
  std::unordered_set<CellIndex> seeded;
  visited.emplace(*start_cell, sample.seed);
  seeded.insert(*start_cell);
  std::deque<std::size_t> queue{0};

  std::vector<Rk4> steppers;
  for (std::size_t i = 0; i < n; ++i) steppers.emplace_back(sys, i);

  while (!queue.empty() && sample.budget_used < options.budget) {
    const std::size_t parent = queue.front();
    queue.pop_front();
    ++sample.budget_used;
    for (std::size_t i = 0; i < n; ++i) {
      for (int dir : {1, -1}) {
        Point y = sample.frontier_points[parent];
        steppers[i].reset();
        bool pruned = false;
        for (std::size_t s = 0; s < steps; ++s) {
          if (!steppers[i].step(y, dir * h)) {
            pruned = true;
            break;
          }
          auto cell = dedup.locate(y);
          if (!cell || !sys.box().contains(y)) {
            ++sample.escaped_branches;
            if (sample.escape_points.size() < kMaxEscapePoints) sample.escape_points.push_back(y);
            pruned = true;
            break;
          }
          visited.try_emplace(*cell, y);
        }
        if (pruned) continue;
        CellIndex end_cell = *dedup.locate(y);
        if (seeded.insert(end_cell).second) {
          sample.log.push_back({parent, i, dir * options.quantum});
          sample.frontier_points.push_back(std::move(y));
          queue.push_back(sample.frontier_points.size() - 1);
        }
      }
    }
  }
  sample.closed = queue.empty();

  sample.cells.reserve(visited.size());
  for (const auto& entry : visited) sample.cells.push_back(entry.first);
  std::sort(sample.cells.begin(), sample.cells.end());
  sample.cloud.reserve(sample.cells.size());
  const Point f0 = sys.values(x0);
  for (CellIndex c : sample.cells) {
    const Point& p = visited.at(c);
    if (auto v = sys.try_values(p)) {
      for (std::size_t j = 0; j < n; ++j) sample.value_drift = std::max(sample.value_drift, std::abs((*v)[j] - f0[j]));
    }
    sample.cloud.push_back(p);
  }
  return sample;
}

int orbit_dimension(const hamsys::IntegrableSystem& sys, std::span<const double> x, double tol) {
  return hamsys::jacobian_rank(sys, x, tol);
}

CompletenessReport completeness_probe(const hamsys::IntegrableSystem& sys, std::size_t trials,
                                      double horizon, const ProbeOptions& options) {
  if (trials < 1) throw InvalidArgument("completeness probe needs at least one trial");
  if (!(horizon > 0.0)) throw InvalidArgument("probe horizon must be positive");
  const std::size_t steps = step_count(horizon, options.step);
  const double h = horizon / static_cast<double>(steps);
  const double radius = options.inflation * sys.box().radius();
  const Point center = sys.box().center();
  constexpr double kBlowUpNorm = 1e150;

  CompletenessReport report;
  report.trials = trials;
  report.horizon = horizon;
  BoxSampler sampler(sys.box(), mix_seed(options.seed, 0x636f6d70ULL));
  for (std::size_t t = 0; t < trials; ++t) {
    const Point seed = sampler();
    for (std::size_t i = 0; i < static_cast<std::size_t>(sys.dof()); ++i) {
      Rk4 rk(sys, i);
      for (int dir : {1, -1}) {
        EscapeRecord rec;
        rec.seed = seed;
        rec.field = i;
        rec.direction = dir;
        Point x = seed;
        rk.reset();
        bool escaped = false;
        double escape_speed = 0.0;
        for (std::size_t s = 1; s <= steps; ++s) {
          if (!rk.step(x, dir * h)) {
            rec.kind = EscapeClass::BlowUp;
            if (!escaped) rec.escape_time = static_cast<double>(s) * h;
            break;
          }
          double r = norm_from(x, center);
          if (r > kBlowUpNorm) {
            rec.kind = EscapeClass::BlowUp;
            if (!escaped) rec.escape_time = static_cast<double>(s) * h;
            break;
          }
          if (!escaped && r > radius) {
            escaped = true;
            rec.escape_time = static_cast<double>(s) * h;
            escape_speed = rk.speed(x);
          }
        }
        rec.final_norm = norm_from(x, center);
        if (rec.kind == EscapeClass::BlowUp) {
          report.witnesses.push_back(std::move(rec));
          continue;
        }
        if (!escaped) {
          ++report.bounded;
          continue;
        }
        double end_speed = rk.speed(x);
        rec.speed_ratio = escape_speed > 0.0 ? end_speed / escape_speed : end_speed > 0.0 ? INFINITY : 1.0;
        if (!std::isfinite(end_speed) || rec.speed_ratio > options.speed_growth) {
          rec.kind = EscapeClass::Superlinear;
          report.witnesses.push_back(std::move(rec));
        } else {
          rec.kind = EscapeClass::Linear;
          report.linear_escapes.push_back(std::move(rec));
        }
      }
    }
  }
  return report;
}

}  // namespace intsys::flow
