#include <cmath>

#include "doctest.h"
#include "intsys/grid.hpp"
#include "intsys/sampling.hpp"

using namespace intsys;

TEST_SUITE("grid") {

TEST_CASE("box validation") {
  CHECK_THROWS_AS(Box({0, 0}, {1, 0}), InvalidArgument);
  CHECK_THROWS_AS(Box({0}, {1, 1}), InvalidArgument);
  Box b({-1, -2}, {1, 2});
  CHECK(b.contains(std::vector<double>{1, 2}));
  CHECK_FALSE(b.contains(std::vector<double>{1.01, 0}));
  CHECK(b.inflated(0.1).hi(1) == doctest::Approx(2.2));
  CHECK(b.radius() == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("seeded sampling is reproducible") {
  BoxSampler a(Box({0, 0}, {1, 1}), 7), b(Box({0, 0}, {1, 1}), 7), c(Box({0, 0}, {1, 1}), 8);
  auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(mix_seed(0, 1) != mix_seed(0, 2));
}

TEST_CASE("cell indexing") {
  CellGrid g(Box({0, 0, 0}, {1, 2, 3}), {4, 5, 6});
  CHECK(g.cell_count() == 120);
  CHECK(g.cell_size(1) == doctest::Approx(0.4));
  std::vector<std::size_t> idx(3);
  for (CellIndex c = 0; c < g.cell_count(); ++c) {
    g.coords(c, idx);
    CHECK(g.index(idx) == c);
    CHECK(g.locate(g.center(c)) == c);
  }
  CHECK(g.locate(std::vector<double>{1, 2, 3}) == g.cell_count() - 1);
  CHECK_FALSE(g.locate(std::vector<double>{1.1, 0, 0}).has_value());
  CHECK_FALSE(g.neighbor(0, 0, -1).has_value());
  CHECK(g.neighbor(0, 1, +1) == g.stride(1));
  CHECK(g.on_boundary(0));
  CHECK_THROWS_AS(CellGrid(Box({0}, {1}), {1}), InvalidArgument);
}

TEST_CASE("image lattice") {
  auto lat = ImageLattice::parse("0:2:20");
  CHECK(lat.size() == 20);
  CHECK(lat.value(0)[0] == doctest::Approx(0.05));
  CHECK(lat.value(9)[0] == 0.95);
  CHECK(lat.cell_of(std::vector<double>{0.0}) == 0);
  CHECK(lat.cell_of(std::vector<double>{2.0}) == 19);
  CHECK(lat.cell_of(std::vector<double>{1.0}) == 10);
  CHECK_FALSE(lat.cell_of(std::vector<double>{2.01}).has_value());
  CHECK_FALSE(lat.cell_of(std::vector<double>{-0.01}).has_value());

  auto lat2 = ImageLattice::parse("0:1:2,-1:1:4");
  CHECK(lat2.size() == 8);
  CHECK(lat2.value(5) == std::vector<double>{0.75, 0.25});
  CHECK(lat2.adjacent(0, 3));
  CHECK_FALSE(lat2.adjacent(0, 4));
  CHECK(ImageLattice::parse(lat2.to_string()).size() == 8);
  CHECK_THROWS_AS(ImageLattice::parse("0:1"), InvalidArgument);
  CHECK_THROWS_AS(ImageLattice::parse("1:0:3"), InvalidArgument);
  CHECK_THROWS_AS(ImageLattice::parse("0:1:0"), InvalidArgument);
}

TEST_CASE("disjoint sets") {
  DisjointSets s(6);
  CHECK(s.unite(0, 1));
  CHECK(s.unite(2, 3));
  CHECK_FALSE(s.unite(1, 0));
  CHECK(s.unite(1, 3));
  CHECK(s.find(0) == s.find(2));
  CHECK(s.find(4) != s.find(5));
}

}
