#include "intsys/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <system_error>

namespace intsys::expr {

int arity(Op op) noexcept {
  switch (op) {
    case Op::Constant:
    case Op::Variable:
      return 0;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
      return 1;
    default:
      return 2;
  }
}

std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::Constant: return "const";
    case Op::Variable: return "var";
    case Op::Neg: return "neg";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Pow: return "pow";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// VariableList

VariableList VariableList::canonical(int dof) {
  if (dof < 1) throw InvalidArgument("degrees of freedom must be at least 1");
  std::vector<std::string> names;
  names.reserve(2 * static_cast<std::size_t>(dof));
  for (int i = 1; i <= dof; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= dof; ++i) names.push_back("p" + std::to_string(i));
  return VariableList(std::move(names), dof);
}

VariableList::VariableList(std::vector<std::string> names, int dof)
    : names_(std::move(names)), dof_(dof) {
  if (dof_ < 1) throw InvalidArgument("degrees of freedom must be at least 1");
  if (names_.size() != 2 * static_cast<std::size_t>(dof_)) {
    throw InvalidArgument("variable list must hold exactly 2n names");
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) throw InvalidArgument("variable names must be unique");
}

std::optional<int> VariableList::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Expr

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(int index) {
  if (index < 0) throw InvalidArgument("variable index must be non-negative");
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->var = index;
  n->max_var = index;
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr operand) {
  if (expr::arity(op) != 1) throw InvalidArgument("not a unary operator: " + std::string(op_name(op)));
  auto n = std::make_shared<Node>();
  n->op = op;
  n->size = 1 + operand.size();
  n->max_var = operand.max_variable_index();
  n->children[0] = std::move(operand);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (expr::arity(op) != 2) throw InvalidArgument("not a binary operator: " + std::string(op_name(op)));
  if (op == Op::Pow && !rhs.is_constant()) {
    throw InvalidArgument("pow exponent must be a constant");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->size = 1 + lhs.size() + rhs.size();
  n->max_var = std::max(lhs.max_variable_index(), rhs.max_variable_index());
  n->children[0] = std::move(lhs);
  n->children[1] = std::move(rhs);
  return Expr(std::move(n));
}

Op Expr::op() const noexcept { return node_ ? node_->op : Op::Constant; }
double Expr::value() const noexcept { return node_ ? node_->value : 0.0; }
int Expr::variable_index() const noexcept { return node_ ? node_->var : -1; }
std::size_t Expr::size() const noexcept { return node_ ? node_->size : 1; }
int Expr::max_variable_index() const noexcept { return node_ ? node_->max_var : -1; }

const Expr& Expr::child(std::size_t i) const {
  if (i >= static_cast<std::size_t>(arity())) throw InvalidArgument("child index out of range");
  return node_->children[i];
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }
Expr pow(const Expr& base, double exponent) {
  return Expr::binary(Op::Pow, base, Expr::constant(exponent));
}
Expr sin(const Expr& a) { return Expr::unary(Op::Sin, a); }
Expr cos(const Expr& a) { return Expr::unary(Op::Cos, a); }
Expr exp(const Expr& a) { return Expr::unary(Op::Exp, a); }
Expr log(const Expr& a) { return Expr::unary(Op::Log, a); }
Expr sqrt(const Expr& a) { return Expr::unary(Op::Sqrt, a); }

namespace {

bool same_constant(double a, double b) noexcept {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b && std::signbit(a) == std::signbit(b);
}

bool is_commutative(Op op) noexcept { return op == Op::Add || op == Op::Mul; }

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) noexcept {
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Constant:
      return same_constant(a.value(), b.value());
    case Op::Variable:
      return a.variable_index() == b.variable_index();
    default:
      break;
  }
  for (int i = 0; i < a.arity(); ++i) {
    if (!structurally_equal(a.child(i), b.child(i))) return false;
  }
  return true;
}

bool equal_up_to_commutation(const Expr& a, const Expr& b) noexcept {
  if (a.op() != b.op() || a.size() != b.size()) return false;
  switch (a.op()) {
    case Op::Constant:
      return same_constant(a.value(), b.value());
    case Op::Variable:
      return a.variable_index() == b.variable_index();
    default:
      break;
  }
  if (a.arity() == 1) return equal_up_to_commutation(a.child(0), b.child(0));
  if (equal_up_to_commutation(a.child(0), b.child(0)) &&
      equal_up_to_commutation(a.child(1), b.child(1))) {
    return true;
  }
  return is_commutative(a.op()) && equal_up_to_commutation(a.child(0), b.child(1)) &&
         equal_up_to_commutation(a.child(1), b.child(0));
}

// ---------------------------------------------------------------------------
// Errors

ParseError::ParseError(const std::string& message, std::size_t position)
    : Error(message + " (at position " + std::to_string(position) + ")"), position_(position) {}

UnknownVariableError::UnknownVariableError(std::string name, std::size_t position)
    : ParseError("unknown variable '" + name + "'", position), name_(std::move(name)) {}

NonConstantExponentError::NonConstantExponentError(std::size_t position)
    : ParseError("exponent must be a constant expression", position) {}

DomainError::DomainError(const std::string& message, Expr subexpression)
    : Error(message), subexpression_(std::move(subexpression)) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_function_name(std::string_view s, Op& op) {
  static constexpr std::pair<std::string_view, Op> table[] = {
      {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt}};
  for (const auto& [name, o] : table) {
    if (s == name) {
      op = o;
      return true;
    }
  }
  return false;
}

class Parser {
 public:
  Parser(std::string_view src, const VariableList& vars) : src_(src), vars_(vars) {}

  Expr run() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    if (pos_ >= src_.size()) throw ParseError(what + " at end of input", pos_);
    throw ParseError(what, pos_);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) {
      // A bare numeric literal after '-' is read as a negative constant,
      // unless it is the base of '^' (which binds tighter than '-').
      std::size_t save = pos_;
      skip_space();
      if (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        double v = read_number();
        if (peek() != '^') return Expr::constant(-v);
      }
      pos_ = save;
      return -parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      skip_space();
      std::size_t at = pos_;
      Expr exponent = simplify(parse_unary());
      if (!exponent.is_constant()) throw NonConstantExponentError(at);
      return Expr::binary(Op::Pow, std::move(base), std::move(exponent));
    }
    return base;
  }

  double read_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = mark;  // "2e" is the number 2 followed by something else
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return v;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("expected an operand");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Expr::constant(read_number());
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      std::string_view name = src_.substr(start, pos_ - start);
      Op fn{};
      if (is_function_name(name, fn)) {
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        Expr arg = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return Expr::unary(fn, std::move(arg));
      }
      auto index = vars_.index_of(name);
      if (!index) throw UnknownVariableError(std::string(name), start);
      return Expr::variable(*index);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  const VariableList& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, const VariableList& vars) {
  return Parser(source, vars).run();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Constant:
      return std::signbit(e.value()) ? 0 : 5;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class Printer {
 public:
  explicit Printer(const VariableList* vars) : vars_(vars) {}

  void print(const Expr& e, std::string& out) const {
    switch (e.op()) {
      case Op::Constant:
        if (std::signbit(e.value())) {
          out += "(-";
          out += format_number(-e.value());
          out += ')';
        } else {
          out += format_number(e.value());
        }
        return;
      case Op::Variable:
        out += variable_name(e.variable_index());
        return;
      case Op::Neg: {
        out += '-';
        const Expr& a = e.child(0);
        // "-2" would read back as the constant -2.
        bool wrap = precedence(a) < 3 || (a.is_constant() && !std::signbit(a.value()));
        print_wrapped(a, wrap, out);
        return;
      }
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Log:
      case Op::Sqrt:
        out += op_name(e.op());
        out += '(';
        print(e.child(0), out);
        out += ')';
        return;
      case Op::Pow:
        print_wrapped(e.child(0), precedence(e.child(0)) <= 4, out);
        out += '^';
        print(e.child(1), out);
        return;
      default: {
        int p = precedence(e);
        print_wrapped(e.child(0), precedence(e.child(0)) < p, out);
        out += symbol(e.op());
        print_wrapped(e.child(1), precedence(e.child(1)) <= p, out);
        return;
      }
    }
  }

 private:
  static const char* symbol(Op op) {
    switch (op) {
      case Op::Add: return " + ";
      case Op::Sub: return " - ";
      case Op::Mul: return "*";
      case Op::Div: return "/";
      default: return "?";
    }
  }

  void print_wrapped(const Expr& e, bool wrap, std::string& out) const {
    // Negative constants carry their own parentheses.
    if (wrap && !(e.is_constant() && std::signbit(e.value()))) {
      out += '(';
      print(e, out);
      out += ')';
    } else {
      print(e, out);
    }
  }

  std::string variable_name(int index) const {
    if (vars_ && static_cast<std::size_t>(index) < vars_->size()) return vars_->name(index);
    return "x" + std::to_string(index);
  }

  const VariableList* vars_;
};

std::string describe(const Expr& e, std::size_t nvars) {
  std::string out;
  if (nvars > 0 && nvars % 2 == 0 && e.max_variable_index() < static_cast<int>(nvars)) {
    auto vars = VariableList::canonical(static_cast<int>(nvars / 2));
    Printer(&vars).print(e, out);
  } else {
    Printer(nullptr).print(e, out);
  }
  return out;
}

}  // namespace

std::string to_string(const Expr& e, const VariableList& vars) {
  std::string out;
  Printer(&vars).print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

std::optional<double> fold_unary(Op op, double a) {
  double r = 0.0;
  switch (op) {
    case Op::Neg: r = -a; break;
    case Op::Sin: r = std::sin(a); break;
    case Op::Cos: r = std::cos(a); break;
    case Op::Exp: r = std::exp(a); break;
    case Op::Log:
      if (!(a > 0.0)) return std::nullopt;
      r = std::log(a);
      break;
    case Op::Sqrt:
      if (a < 0.0) return std::nullopt;
      r = std::sqrt(a);
      break;
    default:
      return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

std::optional<double> fold_binary(Op op, double a, double b) {
  double r = 0.0;
  switch (op) {
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div:
      if (b == 0.0) return std::nullopt;
      r = a / b;
      break;
    case Op::Pow: r = std::pow(a, b); break;
    default:
      return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

Expr negate(const Expr& a) {
  if (a.op() == Op::Neg) return a.child(0);
  if (a.is_constant()) return Expr::constant(-a.value());
  return -a;
}

}  // namespace

Expr simplify(const Expr& e) {
  switch (e.arity()) {
    case 0:
      return e;
    case 1: {
      Expr a = simplify(e.child(0));
      if (a.is_constant()) {
        if (auto v = fold_unary(e.op(), a.value())) return Expr::constant(*v);
      }
      if (e.op() == Op::Neg) return negate(a);
      return Expr::unary(e.op(), std::move(a));
    }
    default:
      break;
  }

  Expr a = simplify(e.child(0));
  Expr b = simplify(e.child(1));
  if (a.is_constant() && b.is_constant()) {
    if (auto v = fold_binary(e.op(), a.value(), b.value())) return Expr::constant(*v);
  }

  switch (e.op()) {
    case Op::Add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      if (b.op() == Op::Neg) return simplify(a - b.child(0));
      if (a.op() == Op::Neg) return simplify(b - a.child(0));
      return a + b;
    case Op::Sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return negate(b);
      if (equal_up_to_commutation(a, b)) return Expr::constant(0.0);
      if (b.op() == Op::Neg) return simplify(a + b.child(0));
      return a - b;
    case Op::Mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(-1.0)) return negate(b);
      if (b.is_constant(-1.0)) return negate(a);
      // constants collect on the left
      if (b.is_constant() && !a.is_constant()) return simplify(b * a);
      if (a.is_constant() && b.op() == Op::Mul && b.child(0).is_constant()) {
        if (auto v = fold_binary(Op::Mul, a.value(), b.child(0).value())) {
          return simplify(Expr::constant(*v) * b.child(1));
        }
      }
      return a * b;
    case Op::Div:
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(0.0)) return Expr::constant(0.0);
      if (equal_up_to_commutation(a, b)) return Expr::constant(1.0);
      if (b.is_constant() && a.op() == Op::Mul && a.child(0).is_constant()) {
        if (auto v = fold_binary(Op::Div, a.child(0).value(), b.value())) {
          return simplify(Expr::constant(*v) * a.child(1));
        }
      }
      return a / b;
    case Op::Pow:
      if (b.is_constant(1.0)) return a;
      if (b.is_constant(0.0)) return Expr::constant(1.0);
      return Expr::binary(Op::Pow, std::move(a), std::move(b));
    default:
      return Expr::binary(e.op(), std::move(a), std::move(b));
  }
}

namespace {

Expr derive(const Expr& e, int index) {
  static const Expr zero = Expr::constant(0.0);
  static const Expr one = Expr::constant(1.0);
  if (e.max_variable_index() < index) return zero;
  switch (e.op()) {
    case Op::Constant:
      return zero;
    case Op::Variable:
      return e.variable_index() == index ? one : zero;
    case Op::Neg:
      return -derive(e.child(0), index);
    case Op::Sin:
      return cos(e.child(0)) * derive(e.child(0), index);
    case Op::Cos:
      return -(sin(e.child(0)) * derive(e.child(0), index));
    case Op::Exp:
      return e * derive(e.child(0), index);
    case Op::Log:
      return derive(e.child(0), index) / e.child(0);
    case Op::Sqrt:
      return derive(e.child(0), index) / (Expr::constant(2.0) * e);
    case Op::Add:
      return derive(e.child(0), index) + derive(e.child(1), index);
    case Op::Sub:
      return derive(e.child(0), index) - derive(e.child(1), index);
    case Op::Mul: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      return derive(u, index) * v + u * derive(v, index);
    }
    case Op::Div: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      return (derive(u, index) * v - u * derive(v, index)) / pow(v, 2.0);
    }
    case Op::Pow: {
      const Expr& u = e.child(0);
      double c = e.child(1).value();
      return Expr::constant(c) * pow(u, c - 1.0) * derive(u, index);
    }
  }
  return zero;
}

}  // namespace

Expr differentiate(const Expr& e, int index) {
  if (index < 0) throw InvalidArgument("variable index must be non-negative");
  return simplify(derive(e, index));
}

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  switch (e.op()) {
    case Op::Constant:
      return e;
    case Op::Variable: {
      auto i = static_cast<std::size_t>(e.variable_index());
      if (i >= replacements.size()) throw InvalidArgument("substitution does not cover variable index");
      return replacements[i];
    }
    default:
      break;
  }
  if (e.arity() == 1) return Expr::unary(e.op(), substitute(e.child(0), replacements));
  return Expr::binary(e.op(), substitute(e.child(0), replacements),
                      substitute(e.child(1), replacements));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_tree(const Expr& e, std::span<const double> x) {
  auto domain = [&](const std::string& why) -> DomainError {
    return DomainError("domain error in " + describe(e, x.size()) + ": " + why, e);
  };
  double r = 0.0;
  switch (e.op()) {
    case Op::Constant:
      return e.value();
    case Op::Variable: {
      auto i = static_cast<std::size_t>(e.variable_index());
      if (i >= x.size()) throw InvalidArgument("phase point is shorter than the variable list");
      return x[i];
    }
    case Op::Neg: r = -eval_tree(e.child(0), x); break;
    case Op::Sin: r = std::sin(eval_tree(e.child(0), x)); break;
    case Op::Cos: r = std::cos(eval_tree(e.child(0), x)); break;
    case Op::Exp: r = std::exp(eval_tree(e.child(0), x)); break;
    case Op::Log: {
      double a = eval_tree(e.child(0), x);
      if (!(a > 0.0)) throw domain("logarithm of non-positive value " + format_number(a));
      r = std::log(a);
      break;
    }
    case Op::Sqrt: {
      double a = eval_tree(e.child(0), x);
      if (a < 0.0) throw domain("square root of negative value " + format_number(a));
      r = std::sqrt(a);
      break;
    }
    case Op::Add: r = eval_tree(e.child(0), x) + eval_tree(e.child(1), x); break;
    case Op::Sub: r = eval_tree(e.child(0), x) - eval_tree(e.child(1), x); break;
    case Op::Mul: r = eval_tree(e.child(0), x) * eval_tree(e.child(1), x); break;
    case Op::Div: {
      double a = eval_tree(e.child(0), x);
      double b = eval_tree(e.child(1), x);
      if (b == 0.0) throw domain("division by zero");
      r = a / b;
      break;
    }
    case Op::Pow: r = std::pow(eval_tree(e.child(0), x), e.child(1).value()); break;
  }
  if (!std::isfinite(r)) throw domain("non-finite result");
  return r;
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> x) { return eval_tree(e, x); }

Program::Program(const Expr& e) : source_(e) {
  std::size_t depth = 0;
  std::function<void(const Expr&)> emit = [&](const Expr& s) {
    for (int i = 0; i < s.arity(); ++i) emit(s.child(i));
    if (s.op() == Op::Pow) {
      // exponent is folded into the instruction
      code_.pop_back();
      --depth;
      code_.push_back({Op::Pow, s.child(1).value(), -1});
      return;
    }
    code_.push_back({s.op(), s.value(), s.variable_index()});
    if (s.arity() == 0) {
      max_depth_ = std::max(max_depth_, ++depth);
    } else if (s.arity() == 2) {
      --depth;
    }
  };
  emit(e);
}

std::optional<double> Program::try_evaluate(std::span<const double> x) const noexcept {
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& in : code_) {
    double r = 0.0;
    switch (in.op) {
      case Op::Constant:
        stack[top++] = in.value;
        continue;
      case Op::Variable:
        if (static_cast<std::size_t>(in.var) >= x.size()) return std::nullopt;
        stack[top++] = x[static_cast<std::size_t>(in.var)];
        continue;
      case Op::Neg: r = -stack[top - 1]; break;
      case Op::Sin: r = std::sin(stack[top - 1]); break;
      case Op::Cos: r = std::cos(stack[top - 1]); break;
      case Op::Exp: r = std::exp(stack[top - 1]); break;
      case Op::Log:
        if (!(stack[top - 1] > 0.0)) return std::nullopt;
        r = std::log(stack[top - 1]);
        break;
      case Op::Sqrt:
        if (stack[top - 1] < 0.0) return std::nullopt;
        r = std::sqrt(stack[top - 1]);
        break;
      case Op::Pow: r = std::pow(stack[top - 1], in.value); break;
      case Op::Add: r = stack[top - 2] + stack[top - 1]; --top; break;
      case Op::Sub: r = stack[top - 2] - stack[top - 1]; --top; break;
      case Op::Mul: r = stack[top - 2] * stack[top - 1]; --top; break;
      case Op::Div:
        if (stack[top - 1] == 0.0) return std::nullopt;
        r = stack[top - 2] / stack[top - 1];
        --top;
        break;
    }
    if (!std::isfinite(r)) return std::nullopt;
    stack[top - 1] = r;
  }
  return top == 1 ? std::optional<double>(stack[0]) : std::nullopt;
}

double Program::operator()(std::span<const double> x) const {
  if (auto v = try_evaluate(x)) return *v;
  return eval_tree(source_, x);  // rethrows with the failing subexpression
}

// ---------------------------------------------------------------------------
// Zero testing

std::string_view to_string(ZeroKind kind) noexcept {
  switch (kind) {
    case ZeroKind::Symbolic: return "symbolic-zero";
    case ZeroKind::Numeric: return "numeric-zero";
    case ZeroKind::Nonzero: return "nonzero";
  }
  return "?";
}

ZeroVerdict is_identically_zero(const Expr& e, const PointSampler& sampler, std::size_t count,
                                double tol) {
  if (count < 1) throw InvalidArgument("zero test needs at least one sample");
  if (!(tol > 0.0)) throw InvalidArgument("zero test tolerance must be positive");
  ZeroVerdict verdict;
  Expr s = simplify(e);
  if (s.is_constant(0.0)) return verdict;

  Program program(s);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> x = sampler();
    auto v = program.try_evaluate(x);
    if (!v) {
      ++verdict.domain_errors;
      continue;
    }
    ++verdict.evaluated;
    if (std::abs(*v) > tol) {
      verdict.kind = ZeroKind::Nonzero;
      verdict.witness = std::move(x);
      verdict.witness_value = *v;
      return verdict;
    }
  }
  if (verdict.evaluated == 0) {
    throw InconclusiveError("zero test inconclusive: every sampled point was a domain error");
  }
  verdict.kind = ZeroKind::Numeric;
  return verdict;
}

}  // namespace intsys::expr
