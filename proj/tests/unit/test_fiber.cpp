#include <cmath>

#include "doctest.h"
#include "intsys/fiber.hpp"
#include "oracles.hpp"

using namespace intsys;
using namespace intsys::fiber;
using hamsys::IntegrableSystem;

namespace {

IntegrableSystem osc1() { return IntegrableSystem::from_strings("osc1", 1, {"(q1^2+p1^2)/2"}, Box({-2, -2}, {2, 2})); }
IntegrableSystem free1() { return IntegrableSystem::from_strings("free", 1, {"p1"}, Box({-2, -2}, {2, 2})); }
IntegrableSystem dwell() {
  return IntegrableSystem::from_strings("dw", 1, {"p1^2/2 + (q1^2-1)^2"}, Box({-2.5, -3}, {2.5, 3}));
}
IntegrableSystem osc2() {
  return IntegrableSystem::from_strings("osc2", 2, {"(q1^2+p1^2)/2", "(q2^2+p2^2)/2"}, Box({-2, -2, -2, -2}, {2, 2, 2, 2}));
}

std::vector<double> v(double c) { return {c}; }

}  // namespace

TEST_SUITE("fiber") {

TEST_CASE("oscillator fiber is an annulus") {
  auto sys = osc1();
  auto grid = CellGrid::uniform(sys.box(), 200);
  auto fs = sample_fiber(sys, v(0.5), grid);
  REQUIRE_FALSE(fs.marked.empty());
  const double h = grid.cell_size(0);
  for (auto c : fs.marked) {
    auto x = grid.center(c);
    CHECK(std::abs(std::hypot(x[0], x[1]) - 1.0) <= 3 * h);
  }
  CHECK(std::is_sorted(fs.marked.begin(), fs.marked.end()));
}

TEST_CASE("unreachable value gives an empty sample") {
  auto sys = osc1();
  auto fs = sample_fiber(sys, v(-1), CellGrid::uniform(sys.box(), 100));
  CHECK(fs.marked.empty());
  CHECK(connected_components(fs).count() == 0);
}

TEST_CASE("free particle fiber is a horizontal band") {
  auto sys = free1();
  auto grid = CellGrid::uniform(sys.box(), 200);
  auto fs = sample_fiber(sys, v(1.0), grid);
  std::set<std::size_t> columns;
  std::vector<std::size_t> idx(2);
  for (auto c : fs.marked) {
    auto x = grid.center(c);
    CHECK(std::abs(x[1] - 1.0) <= grid.cell_size(1));
    grid.coords(c, idx);
    columns.insert(idx[0]);
  }
  CHECK(columns.size() == 200);
  CHECK(fiber_component_count(sys, v(1.0), grid) == 1);
}

TEST_CASE("argument checks") {
  auto sys = osc1();
  auto grid = CellGrid::uniform(sys.box(), 10);
  CHECK_THROWS_AS((void)sample_fiber(sys, v(0.5), grid, 0.0), InvalidArgument);
  CHECK_THROWS_AS((void)sample_fiber(sys, std::vector<double>{0.5, 1}, grid), InvalidArgument);
  CHECK_THROWS_AS((void)sample_fiber(sys, v(0.5), CellGrid::uniform(Box({0, 0, 0, 0}, {1, 1, 1, 1}), 3)), InvalidArgument);
}

TEST_CASE("double well component counts match flood fill") {
  auto sys = dwell();
  auto grid = CellGrid::uniform(sys.box(), 300);
  for (double c : {0.0, 0.5, 1.5}) {
    auto fs = sample_fiber(sys, v(c), grid);
    auto lab = connected_components(fs);
    CHECK(lab.count() == oracle::flood_fill_count(grid, fs.marked));
  }
  CHECK(fiber_component_count(sys, v(0.5), grid) == 2);
  CHECK(fiber_component_count(sys, v(1.5), grid) == 1);
  CHECK(fiber_component_count(sys, v(0.0), grid) == 2);
}

TEST_CASE("labeling is a canonical partition") {
  auto sys = dwell();
  auto grid = CellGrid::uniform(sys.box(), 120);
  auto fs = sample_fiber(sys, v(0.5), grid);
  auto lab = connected_components(fs);
  REQUIRE(lab.count() == 2);
  CHECK(lab.cells == fs.marked);
  std::size_t total = 0;
  for (std::size_t k = 0; k < lab.count(); ++k) {
    total += lab.sizes[k];
    CHECK(fs.contains(lab.representatives[k]));
    CHECK(lab.label_of(lab.representatives[k]) == static_cast<int>(k));
    if (k) CHECK(lab.representatives[k - 1] < lab.representatives[k]);
  }
  CHECK(total == fs.marked.size());
  // representative is the smallest cell of its label; face neighbours agree
  for (std::size_t a = 0; a < lab.cells.size(); ++a) {
    CHECK(lab.cells[a] >= lab.representatives[static_cast<std::size_t>(lab.labels[a])]);
    for (std::size_t axis = 0; axis < 2; ++axis) {
      auto nb = grid.neighbor(lab.cells[a], axis, +1);
      if (nb && fs.contains(*nb)) CHECK(lab.label_of(*nb) == lab.labels[a]);
    }
  }
  // flood fill from each representative recovers the same block sizes
  for (std::size_t k = 0; k < lab.count(); ++k) {
    std::vector<CellIndex> block;
    for (std::size_t a = 0; a < lab.cells.size(); ++a) {
      if (lab.labels[a] == static_cast<int>(k)) block.push_back(lab.cells[a]);
    }
    CHECK(oracle::flood_fill_count(grid, block) == 1);
  }
}

TEST_CASE("corner connectivity never splits more than face connectivity") {
  auto sys = dwell();
  auto grid = CellGrid::uniform(sys.box(), 100);
  for (double c : {0.2, 0.7, 1.3}) {
    auto fs = sample_fiber(sys, v(c), grid);
    CHECK(connected_components(fs, Connectivity::Corner).count() <= connected_components(fs, Connectivity::Face).count());
  }
  // a diagonal pair is one component only under corner adjacency
  CellGrid g(Box({0, 0}, {1, 1}), {4, 4});
  std::vector<CellIndex> diag{0, 5};
  CHECK(connected_components(g, diag).count() == 2);
  CHECK(connected_components(g, diag, Connectivity::Corner).count() == 1);
}

TEST_CASE("resolution refinement") {
  auto sys = osc1();
  for (double c : {0.1, 0.5, 1.5}) {
    std::size_t prev = 1000;
    for (std::size_t r : {50, 100, 200}) {
      auto n = fiber_component_count(sys, v(c), CellGrid::uniform(sys.box(), r));
      CHECK(n <= prev);
      prev = n;
    }
    CHECK(prev == 1);
  }
  auto dw = dwell();
  for (std::size_t r : {150, 300}) {
    auto grid = CellGrid::uniform(dw.box(), r);
    CHECK(fiber_component_count(dw, v(0.5), grid) == 2);
    CHECK(fiber_component_count(dw, v(1.5), grid) == 1);
  }
}

TEST_CASE("near critical cells") {
  auto sys = dwell();
  auto grid = CellGrid::uniform(sys.box(), 101);
  auto crit = near_critical_cells(sys, grid);
  REQUIRE_FALSE(crit.empty());
  // every flagged cell is near one of the three critical points
  for (auto c : crit) {
    auto x = grid.center(c);
    double d = std::min({std::hypot(x[0], x[1]), std::hypot(x[0] - 1, x[1]), std::hypot(x[0] + 1, x[1])});
    CHECK(d < 0.3);
  }
  CHECK(near_critical_cells(free1(), CellGrid::uniform(free1().box(), 50)).empty());
}

TEST_CASE("bifurcation scan") {
  SUBCASE("oscillator") {
    auto sys = osc1();
    std::vector<Point> values;
    for (int k = 0; k <= 8; ++k) values.push_back({0.25 * k});
    auto t = bifurcation_scan(sys, values, CellGrid::uniform(sys.box(), 200));
    REQUIRE(t.rows.size() == 9);
    for (const auto& row : t.rows) CHECK(row.count == 1);
    CHECK(t.rows[0].critical);
    CHECK_FALSE(t.rows[4].critical);
  }
  SUBCASE("double well") {
    auto sys = dwell();
    std::vector<Point> values{{0.1}, {0.5}, {0.9}, {1.1}, {1.5}, {50.0}};
    auto t = bifurcation_scan(sys, values, CellGrid::uniform(sys.box(), 300));
    std::vector<std::size_t> counts;
    for (const auto& row : t.rows) counts.push_back(row.count);
    CHECK(counts == std::vector<std::size_t>{2, 2, 2, 1, 1, 0});
  }
  SUBCASE("lattice overload flags the barrier") {
    auto sys = dwell();
    auto t = bifurcation_scan(sys, ImageLattice::parse("0:2:20"), CellGrid::uniform(sys.box(), 300));
    REQUIRE(t.rows.size() == 20);
    for (std::size_t k = 0; k < 10; ++k) CHECK(t.rows[k].count == 2);
    for (std::size_t k = 10; k < 20; ++k) CHECK(t.rows[k].count == 1);
    CHECK(t.rows[10].critical);
    CHECK_FALSE(t.rows[15].critical);
  }
}

TEST_CASE("orbit versus fiber") {
  SUBCASE("oscillator") {
    auto sys = osc1();
    auto r = orbit_vs_fiber_check(sys, std::vector<double>{1, 0}, 10000, CellGrid::uniform(sys.box(), 200));
    CHECK(r.containment);
    CHECK(r.coverage >= 0.95);
    CHECK(r.direct_coverage <= r.coverage);
    CHECK(r.stray_cells == 0);
  }
  SUBCASE("double well stays in its well") {
    auto sys = dwell();
    auto grid = CellGrid::uniform(sys.box(), 300);
    auto r = orbit_vs_fiber_check(sys, std::vector<double>{1, 0.5}, 10000, grid);
    CHECK(r.containment);
    CHECK(r.components == 2);
    for (const auto& x : r.orbit.cloud) CHECK(x[0] > 0.0);
  }
  SUBCASE("budget of one") {
    auto sys = osc1();
    auto r = orbit_vs_fiber_check(sys, std::vector<double>{1, 0}, 1, CellGrid::uniform(sys.box(), 200));
    CHECK(r.containment);
    CHECK(r.direct_coverage < 0.2);
  }
  SUBCASE("two degrees of freedom") {
    auto sys = osc2();
    auto r = orbit_vs_fiber_check(sys, std::vector<double>{1, 0.5, 0.2, -0.7}, 2000, CellGrid::uniform(sys.box(), 24));
    CHECK(r.containment);
    CHECK(r.orbit.value_drift < 1e-9);
  }
}

}
