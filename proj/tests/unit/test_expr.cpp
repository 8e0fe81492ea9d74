#include <cmath>
#include <string>

#include "doctest.h"
#include "intsys/expr.hpp"
#include "intsys/sampling.hpp"
#include "oracles.hpp"

using namespace intsys;
using namespace intsys::expr;

namespace {

const VariableList V1 = VariableList::canonical(1);
const VariableList V2 = VariableList::canonical(2);

Expr P(const char* s, const VariableList& v = V1) { return parse(s, v); }

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("variable list") {
  CHECK(V2.names() == std::vector<std::string>{"q1", "q2", "p1", "p2"});
  CHECK(V2.index_of("p1") == 2);
  CHECK_FALSE(V2.index_of("q3").has_value());
  CHECK_THROWS_AS(VariableList({"a", "a"}, 1), InvalidArgument);
  CHECK_THROWS_AS(VariableList({"a", "b", "c"}, 1), InvalidArgument);
}

TEST_CASE("parse builds the expected tree") {
  Expr e = P("q1^2 + sin(p1)");
  REQUIRE(e.op() == Op::Add);
  CHECK(e.child(0).op() == Op::Pow);
  CHECK(e.child(0).child(0).op() == Op::Variable);
  CHECK(e.child(0).child(0).variable_index() == 0);
  CHECK(e.child(0).child(1).is_constant(2.0));
  CHECK(e.child(1).op() == Op::Sin);
  CHECK(e.child(1).child(0).variable_index() == 1);
}

TEST_CASE("precedence") {
  std::vector<double> x{2.0, 3.0};
  CHECK(evaluate(P("-q1^2"), x) == -4.0);
  CHECK(evaluate(P("2^3^2"), x) == 512.0);
  CHECK(evaluate(P("q1 - p1 - 1"), x) == -2.0);
  CHECK(evaluate(P("q1 / p1 * 3"), x) == doctest::Approx(2.0));
  CHECK(evaluate(P("q1 ^ -1"), x) == 0.5);
  CHECK(evaluate(P("  ( q1+p1 ) *2 "), x) == 10.0);
  CHECK(evaluate(P("1.5e1 + .5"), x) == 15.5);
}

TEST_CASE("parse errors") {
  SUBCASE("unknown variable") {
    try {
      (void)parse("q3", V2);
      FAIL("expected an error");
    } catch (const UnknownVariableError& e) {
      CHECK(e.variable() == "q3");
    }
  }
  SUBCASE("unbalanced parenthesis") {
    try {
      (void)parse("(q1", V1);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("at end of input") != std::string::npos);
      CHECK(e.position() == 3);
    }
  }
  SUBCASE("non-constant exponent") { CHECK_THROWS_AS((void)parse("q1^p1", V1), NonConstantExponentError); }
  SUBCASE("constant exponent expression is folded") { CHECK(evaluate(P("q1^(1+1)"), std::vector<double>{3, 0}) == 9.0); }
  SUBCASE("garbage") {
    CHECK_THROWS_AS((void)parse("q1 +", V1), ParseError);
    CHECK_THROWS_AS((void)parse("q1 $ p1", V1), ParseError);
    CHECK_THROWS_AS((void)parse("tan(q1)", V1), ParseError);
    CHECK_THROWS_AS((void)parse("", V1), ParseError);
    CHECK_THROWS_AS((void)parse("q1 p1", V1), ParseError);
  }
}

TEST_CASE("evaluate") {
  CHECK(evaluate(P("q1^2+p1^2"), std::vector<double>{1, 2}) == 5.0);
  CHECK(evaluate(P("(q1^2+p1^2)/2"), std::vector<double>{0.6, 0.8}) == doctest::Approx(0.5).epsilon(1e-15));
  try {
    (void)evaluate(P("1 + log(q1)"), std::vector<double>{-1, 0});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(to_string(e.subexpression(), V1) == "log(q1)");
  }
  CHECK_THROWS_AS((void)evaluate(P("sqrt(q1)"), std::vector<double>{-1, 0}), DomainError);
  CHECK_THROWS_AS((void)evaluate(P("1/q1"), std::vector<double>{0, 0}), DomainError);
}

TEST_CASE("compiled program agrees with tree evaluation") {
  oracle::ExprGen gen(4, 11);
  BoxSampler s(Box({-2, -2, -2, -2}, {2, 2, 2, 2}), 5);
  for (int k = 0; k < 50; ++k) {
    Expr e = gen();
    Program prog(e);
    auto x = s();
    auto v = prog.try_evaluate(x);
    REQUIRE(v.has_value());
    CHECK(*v == evaluate(e, x));
  }
  Program bad(P("log(q1)"));
  CHECK_FALSE(bad.try_evaluate(std::vector<double>{-1, 0}).has_value());
  CHECK_THROWS_AS((void)bad(std::vector<double>{-1, 0}), DomainError);
}

TEST_CASE("differentiate") {
  CHECK(structurally_equal(differentiate(P("q1^2 * p1"), 0), simplify(P("2*q1*p1"))));
  CHECK(structurally_equal(differentiate(P("sin(p1)"), 1), P("cos(p1)")));
  CHECK(differentiate(P("sin(p1)"), 0).is_constant(0.0));
  std::vector<double> x{0.7, -1.3};
  CHECK(evaluate(differentiate(P("q1^2 * p1"), 0), x) == doctest::Approx(2 * 0.7 * -1.3));
}

TEST_CASE("derivative matches central differences") {
  oracle::ExprGen gen(3, 2024);
  VariableList v3({"a", "b", "c", "d"}, 2);
  BoxSampler s(Box({-1.5, -1.5, -1.5, -1.5}, {1.5, 1.5, 1.5, 1.5}), 3);
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    Expr e = gen(4);
    for (int var = 0; var < 3; ++var) {
      Expr d = differentiate(e, var);
      auto x = s();
      double fd = oracle::central_difference(e, x, var);
      double ex = evaluate(d, x);
      if (std::abs(ex) < 1e-3) continue;  // relative error meaningless near zero
      CHECK_MESSAGE(std::abs(ex - fd) / std::abs(ex) < 1e-6, to_string(e, v3));
      ++checked;
    }
  }
  CHECK(checked >= 30);
}

TEST_CASE("differentiate is linear") {
  oracle::ExprGen gen(2, 77);
  BoxSampler s(Box({-1, -1}, {1, 1}), 9);
  for (int k = 0; k < 20; ++k) {
    Expr e1 = gen(3), e2 = gen(3);
    const double a = 1.75;
    Expr lhs = simplify(differentiate(Expr::constant(a) * e1 + e2, 0));
    Expr rhs = simplify(Expr::constant(a) * differentiate(e1, 0) + differentiate(e2, 0));
    for (int t = 0; t < 20; ++t) {
      auto x = s();
      CHECK(evaluate(lhs, x) == doctest::Approx(evaluate(rhs, x)).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("simplify") {
  CHECK(structurally_equal(simplify(Expr::constant(0) + Expr::variable(0)), Expr::variable(0)));
  CHECK(simplify(Expr::variable(1) - Expr::variable(1)).is_constant(0.0));
  CHECK(simplify(Expr::constant(2) * Expr::constant(3)).is_constant(6.0));
  CHECK(simplify(Expr::constant(0) * P("sin(q1)")).is_constant(0.0));
  CHECK(structurally_equal(simplify(Expr::constant(1) * Expr::variable(0)), Expr::variable(0)));
  CHECK(structurally_equal(simplify(Expr::variable(0) / Expr::constant(1)), Expr::variable(0)));
  CHECK(simplify(pow(Expr::variable(0), 0.0)).is_constant(1.0));
  CHECK(structurally_equal(simplify(-(-Expr::variable(0))), Expr::variable(0)));
  CHECK(simplify(P("q1*p1 - p1*q1")).is_constant(0.0));
  // 1/0 is not folded: the domain error stays visible at evaluation time
  CHECK_FALSE(simplify(Expr::constant(1) / Expr::constant(0)).is_constant());
}

TEST_CASE("simplify preserves values") {
  oracle::ExprGen gen(2, 99);
  BoxSampler s(Box({-2, -2}, {2, 2}), 1);
  for (int k = 0; k < 100; ++k) {
    Expr e = gen(5);
    Expr se = simplify(e);
    auto x = s();
    CHECK(evaluate(se, x) == doctest::Approx(evaluate(e, x)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("print / parse round trip on 100 random trees") {
  oracle::ExprGen gen(4, 42, false);
  for (int k = 0; k < 100; ++k) {
    Expr e = gen(5);
    Expr normal = simplify(e);
    std::string text = to_string(normal, V2);
    Expr back = parse(text, V2);
    CHECK_MESSAGE(structurally_equal(back, normal), text);
    CHECK_MESSAGE(structurally_equal(parse(to_string(e, V2), V2), e), to_string(e, V2));
  }
}

TEST_CASE("negative constants print unambiguously") {
  Expr e = Expr::constant(-2) * Expr::variable(0);
  CHECK(structurally_equal(parse(to_string(e, V1), V1), e));
  Expr f = pow(Expr::constant(-2), 2.0);
  CHECK(structurally_equal(parse(to_string(f, V1), V1), f));
  Expr g = -pow(Expr::constant(2), 2.0);
  CHECK(structurally_equal(parse(to_string(g, V1), V1), g));
}

TEST_CASE("substitute") {
  Expr e = P("q1^2 + p1");
  std::vector<Expr> r{P("p1"), P("-q1")};
  CHECK(evaluate(substitute(e, r), std::vector<double>{2, 3}) == 9 - 2);
}

TEST_CASE("zero test") {
  BoxSampler s(Box({-2, -2}, {2, 2}), 0);
  PointSampler sampler = [&] { return s(); };
  SUBCASE("symbolic") {
    auto v = is_identically_zero(P("q1 - q1"), sampler, 10, 1e-10);
    CHECK(v.kind == ZeroKind::Symbolic);
  }
  SUBCASE("numeric") {
    auto v = is_identically_zero(P("sin(q1)^2 + cos(q1)^2 - 1"), sampler, 50, 1e-10);
    CHECK(v.kind == ZeroKind::Numeric);
    CHECK(v.evaluated == 50);
  }
  SUBCASE("nonzero carries a witness") {
    auto v = is_identically_zero(P("q1"), sampler, 50, 1e-10);
    REQUIRE(v.kind == ZeroKind::Nonzero);
    CHECK(std::abs(v.witness[0]) > 1e-10);
    CHECK(v.witness_value == v.witness[0]);
  }
  SUBCASE("all points in the domain error set") {
    CHECK_THROWS_AS((void)is_identically_zero(P("log(-1 - q1^2)"), sampler, 10, 1e-10), InconclusiveError);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS((void)is_identically_zero(P("q1"), sampler, 0, 1e-10), InvalidArgument);
    CHECK_THROWS_AS((void)is_identically_zero(P("q1"), sampler, 1, 0.0), InvalidArgument);
  }
  CHECK(to_string(ZeroKind::Numeric) == "numeric-zero");
}

}
