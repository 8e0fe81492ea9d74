#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <vector>

#include "intsys/expr.hpp"
#include "intsys/grid.hpp"
#include "intsys/sampling.hpp"

namespace oracle {

using intsys::expr::Expr;
using intsys::expr::Op;

/// Random expression trees. `safe` keeps every subexpression inside the
/// evaluation domain on any real input: log and sqrt only see 1 + u^2,
/// division only divides by 2 + u^2.
class ExprGen {
 public:
  ExprGen(int variables, std::uint64_t seed, bool safe = true) : vars_(variables), rng_(seed), safe_(safe) {}

  Expr operator()(int depth = 4) { return node(depth); }

 private:
  Expr leaf() {
    if (rng_.uniform() < 0.6) return Expr::variable(static_cast<int>(rng_.next() % vars_));
    // short decimal constants print and parse exactly
    double c = std::round(rng_.uniform(0.5, 3.0) * 4.0) / 4.0;
    return Expr::constant(c);
  }

  Expr positive(const Expr& u, double shift) { return Expr::constant(shift) + intsys::expr::pow(u, 2.0); }

  Expr node(int depth) {
    if (depth <= 0 || rng_.uniform() < 0.2) return leaf();
    const auto pick = rng_.next() % 10;
    Expr a = node(depth - 1);
    switch (pick) {
      case 0: return a + node(depth - 1);
      case 1: return a - node(depth - 1);
      case 2: return a * node(depth - 1);
      case 3: return safe_ ? a / positive(node(depth - 2), 2.0) : a / node(depth - 1);
      case 4: return intsys::expr::sin(a);
      case 5: return intsys::expr::cos(a);
      case 6: return safe_ ? intsys::expr::log(positive(a, 1.0)) : intsys::expr::log(a);
      case 7: return safe_ ? intsys::expr::sqrt(positive(a, 1.0)) : intsys::expr::sqrt(a);
      case 8: return intsys::expr::pow(a, static_cast<double>(rng_.next() % 3 + 2));
      default: return -a;
    }
  }

  int vars_;
  intsys::Rng rng_;
  bool safe_;
};

/// Central difference of e along variable k.
inline double central_difference(const Expr& e, std::vector<double> x, int k, double h = 1e-5) {
  const double x0 = x[static_cast<std::size_t>(k)];
  x[static_cast<std::size_t>(k)] = x0 + h;
  const double fp = intsys::expr::evaluate(e, x);
  x[static_cast<std::size_t>(k)] = x0 - h;
  const double fm = intsys::expr::evaluate(e, x);
  return (fp - fm) / (2.0 * h);
}

/// Rank by Gaussian elimination with partial pivoting; a pivot counts when it
/// exceeds tol times the largest absolute entry of the input.
inline int gauss_rank(std::vector<double> a, std::size_t rows, std::size_t cols, double tol) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0;
  int rank = 0;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (std::abs(a[i * cols + c]) > std::abs(a[best * cols + c])) best = i;
    }
    if (std::abs(a[best * cols + c]) <= tol * scale) continue;
    for (std::size_t j = 0; j < cols; ++j) std::swap(a[r * cols + j], a[best * cols + j]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      double f = a[i * cols + c] / a[r * cols + c];
      for (std::size_t j = c; j < cols; ++j) a[i * cols + j] -= f * a[r * cols + j];
    }
    ++r;
    ++rank;
  }
  return rank;
}

/// Breadth-first flood fill over face neighbours (coordinate differences in
/// one axis only). Works on multi-indices, not on the library's cell indices.
inline std::size_t flood_fill_count(const intsys::CellGrid& grid, const std::vector<intsys::CellIndex>& marked) {
  const std::size_t d = grid.dim();
  std::set<std::vector<std::size_t>> todo;
  for (auto c : marked) {
    std::vector<std::size_t> idx(d);
    grid.coords(c, idx);
    todo.insert(idx);
  }
  std::size_t components = 0;
  while (!todo.empty()) {
    ++components;
    std::deque<std::vector<std::size_t>> queue{*todo.begin()};
    todo.erase(todo.begin());
    while (!queue.empty()) {
      auto cur = queue.front();
      queue.pop_front();
      for (std::size_t axis = 0; axis < d; ++axis) {
        for (int dir : {-1, 1}) {
          auto nb = cur;
          if (dir < 0 && nb[axis] == 0) continue;
          nb[axis] = dir < 0 ? nb[axis] - 1 : nb[axis] + 1;
          auto it = todo.find(nb);
          if (it == todo.end()) continue;
          todo.erase(it);
          queue.push_back(nb);
        }
      }
    }
  }
  return components;
}

}  // namespace oracle
