#include "mlqd/loqd.hpp"
#include "mlqd/mesh.hpp"
#include "mlqd/physics.hpp"
#include "mlqd/quadrature.hpp"
#include "mlqd/transport.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace mlqd;

namespace {

void BM_StepSegment(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> tau(4096);
  for (auto& t : tau) t = std::pow(10.0, -9.0 + 11.0 * u(rng));
  double in = 1.0;
  std::size_t k = 0;
  for (auto _ : state) {
    const auto r = transport::step_segment_unchecked(in, tau[k++ & 4095], 0.5);
    in = r.outgoing;
    benchmark::DoNotOptimize(r.average);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepSegment);

void BM_TraceDirection(benchmark::State& state) {
  const auto grid = mesh::MaterialGrid::with_cell_width(6.0, 6.0, 0.6);
  const double h_moc = 6.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto dir = mesh::trace_direction(grid, 0.8, 0.6, h_moc);
    benchmark::DoNotOptimize(dir.segments.data());
  }
}
BENCHMARK(BM_TraceDirection)->Arg(80)->Arg(640);

// One 17-group sweep of the 6x6 cm grid, 36 directions.
void BM_Sweep(benchmark::State& state) {
  const auto grid = mesh::MaterialGrid::with_cell_width(6.0, 6.0, 0.6);
  const auto quad = quadrature::build_product_quadrature(3, 3);
  const auto chars = mesh::build_characteristic_grids(grid, quad, 6.0 / static_cast<double>(state.range(0)));
  const auto groups = physics::FrequencyGrid::default_17();
  const auto opacity = physics::OpacityModel::fleck_cummings();
  const physics::PhysicalConstants k;
  const std::size_t n = grid.num_cells();
  const std::size_t G = groups.size();
  std::vector<double> kappa(n * G);
  std::vector<double> emission(n * G);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.05 + 0.9 * static_cast<double>(i) / static_cast<double>(n);
    physics::group_opacity_all(opacity, groups, t, std::span(kappa).subspan(i * G, G));
    physics::group_emission_all(k, groups, t, std::span(emission).subspan(i * G, G));
  }
  const auto src = transport::make_cell_source(n, G, quad.size(), kappa, emission, {}, 0.0);
  auto boundary = transport::BoundaryIntensity::vacuum(G);
  physics::group_emission_all(k, groups, 1.0, boundary.on(mesh::Side::left));
  for (auto _ : state) {
    auto t = transport::sweep(grid, quad, chars, src, boundary);
    benchmark::DoNotOptimize(t.cell_intensity.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(chars.total_segments() * G));
}
BENCHMARK(BM_Sweep)->Arg(80)->Unit(benchmark::kMillisecond);

loqd::LowOrderCoefficients coefficients(const mesh::MaterialGrid& grid) {
  loqd::LowOrderCoefficients coef;
  coef.resize(grid);
  coef.c = physics::PhysicalConstants{}.c;
  coef.inv_dt = 50.0;
  std::fill(coef.absorption.begin(), coef.absorption.end(), coef.c * 3.0);
  std::fill(coef.source.begin(), coef.source.end(), 1.0);
  std::fill(coef.drag.begin(), coef.drag.end(), 3.0);
  std::fill(coef.boundary_factor.begin(), coef.boundary_factor.end(), 0.5);
  for (auto& t : coef.cell_tensor) t.xy = 0.05;
  for (auto& t : coef.face_tensor) t.xy = 0.05;
  return coef;
}

void BM_LowOrderFactor(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const mesh::MaterialGrid grid(6.0, 6.0, n, n);
  const auto coef = coefficients(grid);
  loqd::LowOrderSystem system(grid, true);
  for (auto _ : state) {
    system.clear_factorizations();
    auto s = system.solve(coef);
    benchmark::DoNotOptimize(s.energy.data());
  }
}
BENCHMARK(BM_LowOrderFactor)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_LowOrderReuse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const mesh::MaterialGrid grid(6.0, 6.0, n, n);
  auto coef = coefficients(grid);
  loqd::LowOrderSystem system(grid, true);
  system.solve(coef);
  std::size_t k = 0;
  for (auto _ : state) {
    coef.absorption[0] = coef.c * (3.0 + 1e-6 * static_cast<double>(k++ % 2));
    auto s = system.solve(coef);
    benchmark::DoNotOptimize(s.energy.data());
  }
}
BENCHMARK(BM_LowOrderReuse)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
