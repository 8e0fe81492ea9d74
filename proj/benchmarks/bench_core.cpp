#include <benchmark/benchmark.h>

#include <numbers>

#include "intsys/dspace.hpp"
#include "intsys/expr.hpp"
#include "intsys/fiber.hpp"
#include "intsys/flow.hpp"
#include "intsys/hamsys.hpp"

using namespace intsys;

namespace {

hamsys::IntegrableSystem double_well() {
  return hamsys::IntegrableSystem::from_strings("dw", 1, {"p1^2/2 + (q1^2-1)^2"}, Box({-2.5, -3}, {2.5, 3}));
}

hamsys::IntegrableSystem oscillator2() {
  return hamsys::IntegrableSystem::from_strings("osc2", 2, {"(q1^2+p1^2)/2", "(q2^2+p2^2)/2"},
                                                Box({-2, -2, -2, -2}, {2, 2, 2, 2}));
}

void BM_TreeEvaluate(benchmark::State& state) {
  expr::VariableList vars = expr::VariableList::canonical(2);
  auto e = expr::parse("sin(q1*p2) + exp(-q2^2) * sqrt(1 + p1^2) / (2 + cos(q1))", vars);
  std::vector<double> x{0.3, -0.4, 0.7, 1.1};
  for (auto _ : state) benchmark::DoNotOptimize(expr::evaluate(e, x));
}
BENCHMARK(BM_TreeEvaluate);

void BM_ProgramEvaluate(benchmark::State& state) {
  expr::VariableList vars = expr::VariableList::canonical(2);
  expr::Program prog(expr::parse("sin(q1*p2) + exp(-q2^2) * sqrt(1 + p1^2) / (2 + cos(q1))", vars));
  std::vector<double> x{0.3, -0.4, 0.7, 1.1};
  for (auto _ : state) benchmark::DoNotOptimize(prog(x));
}
BENCHMARK(BM_ProgramEvaluate);

void BM_PoissonBracket(benchmark::State& state) {
  auto sys = oscillator2();
  for (auto _ : state) benchmark::DoNotOptimize(hamsys::poisson_bracket(sys.integral(0), sys.integral(1), 2));
}
BENCHMARK(BM_PoissonBracket);

void BM_Rk4Period(benchmark::State& state) {
  auto sys = hamsys::IntegrableSystem::from_strings("osc1", 1, {"(q1^2+p1^2)/2"}, Box({-2, -2}, {2, 2}));
  std::vector<double> x0{1.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(flow::integrate_flow(sys, 0, x0, 2 * std::numbers::pi, 1e-3));
}
BENCHMARK(BM_Rk4Period)->Unit(benchmark::kMillisecond);

void BM_FiberLabeling(benchmark::State& state) {
  auto sys = double_well();
  auto grid = CellGrid::uniform(sys.box(), static_cast<std::size_t>(state.range(0)));
  std::vector<double> c{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(fiber::fiber_component_count(sys, c, grid));
}
BENCHMARK(BM_FiberLabeling)->Arg(150)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_OrbitSpace(benchmark::State& state) {
  auto sys = oscillator2();
  auto grid = CellGrid::uniform(sys.box(), static_cast<std::size_t>(state.range(0)));
  auto lattice = ImageLattice::parse("0:2:4,0:2:4");
  for (auto _ : state) benchmark::DoNotOptimize(dspace::build_orbit_space(sys, lattice, grid));
}
BENCHMARK(BM_OrbitSpace)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
