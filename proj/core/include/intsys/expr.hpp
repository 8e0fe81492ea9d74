#pragma once

// Scalar expressions over the phase variables q_1..q_n, p_1..p_n.
//
// Grammar (whitespace is insignificant):
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' unary)?          right associative
//   primary  := number | name | func '(' expr ')' | '(' expr ')'
//   func     := sin | cos | exp | log | sqrt
//
// The exponent of '^' must fold to a constant.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intsys/error.hpp"

namespace intsys::expr {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

int arity(Op op) noexcept;
std::string_view op_name(Op op) noexcept;

/// Ordered coordinate names; always 2n entries, q's first.
class VariableList {
 public:
  /// q1..qn, p1..pn.
  static VariableList canonical(int dof);

  VariableList(std::vector<std::string> names, int dof);

  int dof() const noexcept { return dof_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<int> index_of(std::string_view name) const;

  /// Index of q_{i+1} / p_{i+1} for zero-based i.
  int q(int i) const noexcept { return i; }
  int p(int i) const noexcept { return dof_ + i; }

  bool operator==(const VariableList&) const = default;

 private:
  std::vector<std::string> names_;
  int dof_ = 0;
};

/// Immutable expression tree. Copies share nodes; an empty handle is the
/// constant 0.
class Expr {
 public:
  Expr() = default;

  static Expr constant(double value);
  static Expr variable(int index);
  static Expr unary(Op op, Expr operand);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  Op op() const noexcept;
  double value() const noexcept;
  int variable_index() const noexcept;
  int arity() const noexcept { return intsys::expr::arity(op()); }
  const Expr& child(std::size_t i) const;

  bool is_constant() const noexcept { return op() == Op::Constant; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

  /// Number of nodes in the tree.
  std::size_t size() const noexcept;
  /// Largest variable index referenced, or -1.
  int max_variable_index() const noexcept;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Op op = Op::Constant;
  double value = 0.0;
  int var = -1;
  std::array<Expr, 2> children;
  std::size_t size = 1;
  int max_var = -1;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, double exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);

/// Exact node-by-node equality (constants compared by value and sign).
bool structurally_equal(const Expr& a, const Expr& b) noexcept;

/// Structural equality modulo swapping operands of + and *.
bool equal_up_to_commutation(const Expr& a, const Expr& b) noexcept;

// ---------------------------------------------------------------------------
// Parsing and printing

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownVariableError : public ParseError {
 public:
  UnknownVariableError(std::string name, std::size_t position);
  const std::string& variable() const noexcept { return name_; }

 private:
  std::string name_;
};

class NonConstantExponentError : public ParseError {
 public:
  explicit NonConstantExponentError(std::size_t position);
};

Expr parse(std::string_view source, const VariableList& vars);

/// Minimal-parenthesis infix text that parses back to the same tree.
std::string to_string(const Expr& e, const VariableList& vars);

// ---------------------------------------------------------------------------
// Calculus and rewriting

/// Exact partial derivative with respect to variable `index`, simplified.
Expr differentiate(const Expr& e, int index);

/// Constant folding plus a fixed set of identities:
/// 0+x, x+0, x-0, 0-x, x-x, 0*x, 1*x, x/1, 0/x, x^1, x^0, --x.
Expr simplify(const Expr& e);

/// Replace every variable i with replacements[i].
Expr substitute(const Expr& e, std::span<const Expr> replacements);

// ---------------------------------------------------------------------------
// Evaluation

/// Raised on log of a non-positive value, sqrt of a negative value, division
/// by zero, or any other non-finite intermediate result.
class DomainError : public Error {
 public:
  DomainError(const std::string& message, Expr subexpression);
  const Expr& subexpression() const noexcept { return subexpression_; }

 private:
  Expr subexpression_;
};

double evaluate(const Expr& e, std::span<const double> x);

/// Flattened postfix form of an expression for repeated evaluation.
class Program {
 public:
  Program() = default;
  explicit Program(const Expr& e);

  /// Throws DomainError naming the offending subexpression.
  double operator()(std::span<const double> x) const;
  /// Returns nullopt instead of throwing.
  std::optional<double> try_evaluate(std::span<const double> x) const noexcept;

  const Expr& source() const noexcept { return source_; }

 private:
  struct Instr {
    Op op;
    double value;
    int var;
  };
  Expr source_;
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

// ---------------------------------------------------------------------------
// Zero testing

enum class ZeroKind { Symbolic, Numeric, Nonzero };

struct ZeroVerdict {
  ZeroKind kind = ZeroKind::Symbolic;
  std::vector<double> witness;  // set when kind == Nonzero
  double witness_value = 0.0;
  std::size_t evaluated = 0;
  std::size_t domain_errors = 0;

  bool is_zero() const noexcept { return kind != ZeroKind::Nonzero; }
};

std::string_view to_string(ZeroKind kind) noexcept;

using PointSampler = std::function<std::vector<double>()>;

/// Symbolic-zero if simplify() yields the constant 0, otherwise sample
/// `count` points and compare |e(x)| with tol. Throws InconclusiveError when
/// every sampled point is a domain error.
ZeroVerdict is_identically_zero(const Expr& e, const PointSampler& sampler,
                                std::size_t count, double tol);

}  // namespace intsys::expr
