#pragma once

// Integrable systems on R^{2n} with the canonical symplectic form
// sum_i dq_i ^ dp_i.
//
// Conventions (canonical coordinates):
//   {f, g}  = sum_i  df/dq_i dg/dp_i - df/dp_i dg/dq_i
//   X_f     : dq_i/dt = df/dp_i,  dp_i/dt = -df/dq_i
// so that the Lie derivative of f along X_g is {f, g}.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intsys/expr.hpp"
#include "intsys/sampling.hpp"

namespace intsys::hamsys {

/// Components ordered (dq_1..dq_n, dp_1..dp_n).
struct VectorFieldExpr {
  std::vector<expr::Expr> components;
};

class IntegrableSystem {
 public:
  IntegrableSystem(std::string name, int dof, std::vector<expr::Expr> integrals, Box box);

  /// Parses each integral over the canonical variable list.
  static IntegrableSystem from_strings(std::string name, int dof,
                                       const std::vector<std::string>& integrals, Box box);

  const std::string& name() const noexcept { return name_; }
  int dof() const noexcept { return vars_.dof(); }
  std::size_t dimension() const noexcept { return vars_.size(); }
  const expr::VariableList& variables() const noexcept { return vars_; }
  const std::vector<expr::Expr>& integrals() const noexcept { return integrals_; }
  const expr::Expr& integral(std::size_t i) const { return integrals_.at(i); }
  const Box& box() const noexcept { return box_; }

  /// Symbolic d f_i / d x_k.
  const expr::Expr& gradient(std::size_t i, std::size_t k) const;
  const VectorFieldExpr& vector_field(std::size_t i) const;

  /// F(x). Throws expr::DomainError.
  Point values(std::span<const double> x) const;
  std::optional<Point> try_values(std::span<const double> x) const noexcept;
  double value(std::size_t i, std::span<const double> x) const;

  /// DF(x), row-major n x 2n. Throws expr::DomainError.
  std::vector<double> jacobian(std::span<const double> x) const;
  std::optional<std::vector<double>> try_jacobian(std::span<const double> x) const noexcept;

  /// X_{f_i}(x) written into out (length 2n). Returns false on a domain error.
  bool try_vector_field(std::size_t i, std::span<const double> x, std::span<double> out) const noexcept;

  /// Same integrals on a different box.
  IntegrableSystem with_box(Box box) const;

 private:
  struct Compiled;

  std::string name_;
  expr::VariableList vars_;
  std::vector<expr::Expr> integrals_;
  Box box_;
  std::shared_ptr<const Compiled> compiled_;
};

expr::Expr poisson_bracket(const expr::Expr& f, const expr::Expr& g, int dof);

VectorFieldExpr hamiltonian_vector_field(const expr::Expr& f, int dof);

// ---------------------------------------------------------------------------

struct InvolutionReport {
  std::size_t dof = 0;
  /// n x n row-major; symmetric with a symbolic-zero diagonal.
  std::vector<expr::ZeroVerdict> verdicts;
  bool pass = true;
  /// Some pair was accepted on sampling evidence alone.
  bool numeric_only = false;

  const expr::ZeroVerdict& at(std::size_t i, std::size_t j) const { return verdicts.at(i * dof + j); }
};

/// Zero-tests {f_i, f_j} for every i < j at `count` points sampled in the box.
InvolutionReport check_involution(const IntegrableSystem& sys, std::size_t count, double tol,
                                  std::uint64_t seed = 0);

/// Number of singular values of the n x m matrix >= tol * (largest singular value).
int numerical_rank(std::span<const double> row_major, std::size_t rows, std::size_t cols,
                   double tol);

std::vector<double> singular_values(std::span<const double> row_major, std::size_t rows,
                                    std::size_t cols);

/// Rank of DF(x). Throws expr::DomainError.
int jacobian_rank(const IntegrableSystem& sys, std::span<const double> x, double tol = 1e-9);

struct RankReport {
  std::size_t samples = 0;
  std::vector<std::size_t> histogram;  // index r counts points with rank r
  double full_rank_fraction = 0.0;
  std::vector<Point> low_rank_witnesses;  // first few, in sampling order
  std::size_t skipped = 0;               // domain errors, not in samples

  bool passes(double threshold) const noexcept { return full_rank_fraction >= threshold; }
};

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kDefaultFullRankThreshold = 0.95;

RankReport rank_scan(const IntegrableSystem& sys, std::size_t samples, double tol = kDefaultRankTol,
                     std::uint64_t seed = 0);

struct CommutantVerdict {
  bool member = true;
  std::optional<std::size_t> failing_index;  // i with {g, f_i} != 0
  Point witness;
  double witness_value = 0.0;
  bool numeric_only = false;
};

/// g is a member iff {g, f_i} is zero for every i.
CommutantVerdict commutant_test(const IntegrableSystem& sys, const expr::Expr& g, std::size_t count,
                                double tol, std::uint64_t seed = 0);

}  // namespace intsys::hamsys
