#include "intsys/hamsys.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace intsys::hamsys {

using expr::Expr;

struct IntegrableSystem::Compiled {
  std::vector<expr::Program> integrals;
  std::vector<Expr> gradients;               // n x 2n
  std::vector<expr::Program> gradient_code;  // n x 2n
  std::vector<VectorFieldExpr> fields;
};

IntegrableSystem::IntegrableSystem(std::string name, int dof, std::vector<Expr> integrals, Box box)
    : name_(std::move(name)),
      vars_(expr::VariableList::canonical(dof)),
      integrals_(std::move(integrals)),
      box_(std::move(box)) {
  const std::size_t n = static_cast<std::size_t>(dof);
  const std::size_t d = vars_.size();
  if (integrals_.size() != n) {
    throw InvalidArgument("system '" + name_ + "' needs exactly " + std::to_string(n) + " integrals");
  }
  if (box_.dim() != d) {
    throw InvalidArgument("box dimension must be 2n = " + std::to_string(d));
  }
  for (const Expr& f : integrals_) {
    if (f.max_variable_index() >= static_cast<int>(d)) {
      throw InvalidArgument("integral references a variable outside q1..qn, p1..pn");
    }
  }

  auto c = std::make_shared<Compiled>();
  for (const Expr& f : integrals_) c->integrals.emplace_back(f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      c->gradients.push_back(expr::differentiate(integrals_[i], static_cast<int>(k)));
      c->gradient_code.emplace_back(c->gradients.back());
    }
  }
  for (std::size_t i = 0; i < n; ++i) c->fields.push_back(hamiltonian_vector_field(integrals_[i], dof));
  compiled_ = std::move(c);
}

IntegrableSystem IntegrableSystem::from_strings(std::string name, int dof,
                                                const std::vector<std::string>& integrals, Box box) {
  auto vars = expr::VariableList::canonical(dof);
  std::vector<Expr> parsed;
  parsed.reserve(integrals.size());
  for (const auto& s : integrals) parsed.push_back(expr::parse(s, vars));
  return IntegrableSystem(std::move(name), dof, std::move(parsed), std::move(box));
}

IntegrableSystem IntegrableSystem::with_box(Box box) const {
  IntegrableSystem copy = *this;
  if (box.dim() != dimension()) throw InvalidArgument("box dimension must be 2n");
  copy.box_ = std::move(box);
  return copy;
}

const Expr& IntegrableSystem::gradient(std::size_t i, std::size_t k) const {
  return compiled_->gradients.at(i * dimension() + k);
}

const VectorFieldExpr& IntegrableSystem::vector_field(std::size_t i) const {
  return compiled_->fields.at(i);
}

Point IntegrableSystem::values(std::span<const double> x) const {
  Point out(integrals_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = compiled_->integrals[i](x);
  return out;
}

std::optional<Point> IntegrableSystem::try_values(std::span<const double> x) const noexcept {
  Point out(integrals_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto v = compiled_->integrals[i].try_evaluate(x);
    if (!v) return std::nullopt;
    out[i] = *v;
  }
  return out;
}

double IntegrableSystem::value(std::size_t i, std::span<const double> x) const {
  return compiled_->integrals.at(i)(x);
}

std::vector<double> IntegrableSystem::jacobian(std::span<const double> x) const {
  std::vector<double> out(compiled_->gradient_code.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = compiled_->gradient_code[k](x);
  return out;
}

std::optional<std::vector<double>> IntegrableSystem::try_jacobian(
    std::span<const double> x) const noexcept {
  std::vector<double> out(compiled_->gradient_code.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto v = compiled_->gradient_code[k].try_evaluate(x);
    if (!v) return std::nullopt;
    out[k] = *v;
  }
  return out;
}

bool IntegrableSystem::try_vector_field(std::size_t i, std::span<const double> x,
                                        std::span<double> out) const noexcept {
  const std::size_t n = integrals_.size();
  const std::size_t d = 2 * n;
  const expr::Program* row = compiled_->gradient_code.data() + i * d;
  for (std::size_t k = 0; k < n; ++k) {
    auto dq = row[n + k].try_evaluate(x);  // df/dp_k
    auto dp = row[k].try_evaluate(x);      // df/dq_k
    if (!dq || !dp) return false;
    out[k] = *dq;
    out[n + k] = -*dp;
  }
  return true;
}

// ---------------------------------------------------------------------------

Expr poisson_bracket(const Expr& f, const Expr& g, int dof) {
  Expr sum = Expr::constant(0.0);
  for (int i = 0; i < dof; ++i) {
    const int q = i;
    const int p = dof + i;
    Expr term = expr::differentiate(f, q) * expr::differentiate(g, p) -
                expr::differentiate(f, p) * expr::differentiate(g, q);
    sum = sum + term;
  }
  return expr::simplify(sum);
}

VectorFieldExpr hamiltonian_vector_field(const Expr& f, int dof) {
  VectorFieldExpr field;
  field.components.resize(2 * static_cast<std::size_t>(dof));
  for (int i = 0; i < dof; ++i) {
    field.components[static_cast<std::size_t>(i)] = expr::differentiate(f, dof + i);
    field.components[static_cast<std::size_t>(dof + i)] =
        expr::simplify(-expr::differentiate(f, i));
  }
  return field;
}

InvolutionReport check_involution(const IntegrableSystem& sys, std::size_t count, double tol,
                                  std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(sys.dof());
  InvolutionReport report;
  report.dof = n;
  report.verdicts.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      BoxSampler sampler(sys.box(), mix_seed(seed, i * n + j));
      Expr bracket = poisson_bracket(sys.integral(i), sys.integral(j), sys.dof());
      auto verdict = expr::is_identically_zero(bracket, std::ref(sampler), count, tol);
      if (!verdict.is_zero()) report.pass = false;
      if (verdict.kind == expr::ZeroKind::Numeric) report.numeric_only = true;
      report.verdicts[i * n + j] = verdict;
      report.verdicts[j * n + i] = std::move(verdict);
    }
  }
  return report;
}

std::vector<double> singular_values(std::span<const double> row_major, std::size_t rows,
                                    std::size_t cols) {
  if (row_major.size() != rows * cols) throw InvalidArgument("matrix size mismatch");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row_major[r * cols + c];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

int numerical_rank(std::span<const double> row_major, std::size_t rows, std::size_t cols, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("rank tolerance must be positive");
  auto s = singular_values(row_major, rows, cols);
  if (s.empty() || s.front() == 0.0) return 0;
  const double cutoff = tol * s.front();
  return static_cast<int>(std::count_if(s.begin(), s.end(), [&](double v) { return v >= cutoff; }));
}

int jacobian_rank(const IntegrableSystem& sys, std::span<const double> x, double tol) {
  if (x.size() != sys.dimension()) throw InvalidArgument("phase point must have length 2n");
  auto j = sys.jacobian(x);
  return numerical_rank(j, static_cast<std::size_t>(sys.dof()), sys.dimension(), tol);
}

RankReport rank_scan(const IntegrableSystem& sys, std::size_t samples, double tol, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("rank scan needs at least one sample");
  constexpr std::size_t kMaxWitnesses = 16;
  const std::size_t n = static_cast<std::size_t>(sys.dof());
  RankReport report;
  report.histogram.assign(n + 1, 0);
  BoxSampler sampler(sys.box(), mix_seed(seed, 0x72616e6bULL));
  for (std::size_t s = 0; s < samples; ++s) {
    Point x = sampler();
    auto j = sys.try_jacobian(x);
    if (!j) {
      ++report.skipped;
      continue;
    }
    int r = numerical_rank(*j, n, sys.dimension(), tol);
    ++report.histogram[static_cast<std::size_t>(r)];
    ++report.samples;
    if (static_cast<std::size_t>(r) < n && report.low_rank_witnesses.size() < kMaxWitnesses) {
      report.low_rank_witnesses.push_back(std::move(x));
    }
  }
  if (report.samples > 0) {
    report.full_rank_fraction =
        static_cast<double>(report.histogram[n]) / static_cast<double>(report.samples);
  }
  return report;
}

CommutantVerdict commutant_test(const IntegrableSystem& sys, const Expr& g, std::size_t count,
                                double tol, std::uint64_t seed) {
  if (g.max_variable_index() >= static_cast<int>(sys.dimension())) {
    throw InvalidArgument("candidate references a variable outside the system's phase space");
  }
  CommutantVerdict verdict;
  for (std::size_t i = 0; i < sys.integrals().size(); ++i) {
    BoxSampler sampler(sys.box(), mix_seed(seed, 0x636f6d6dULL + i));
    Expr bracket = poisson_bracket(g, sys.integral(i), sys.dof());
    auto z = expr::is_identically_zero(bracket, std::ref(sampler), count, tol);
    if (!z.is_zero()) {
      verdict.member = false;
      verdict.failing_index = i;
      verdict.witness = std::move(z.witness);
      verdict.witness_value = z.witness_value;
      return verdict;
    }
    if (z.kind == expr::ZeroKind::Numeric) verdict.numeric_only = true;
  }
  return verdict;
}

}  // namespace intsys::hamsys
