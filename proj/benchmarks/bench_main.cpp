#include <benchmark/benchmark.h>

#include <array>
#include <map>
#include <random>

#include "its/builder.hpp"
#include "its/polynomial.hpp"
#include "its/query.hpp"
#include "shapes.hpp"

using namespace its;

namespace {

const BuildOutput& torus_build(int k) {
  static std::map<int, BuildOutput> cache;
  auto it = cache.find(k);
  if (it == cache.end())
    it = cache.emplace(k, build_field(testing::make_torus(1.0, 0.35, 150, 100), k, DistanceMode::Signed)).first;
  return it->second;
}

std::vector<Vec3> unit_points(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

void BM_Evaluate(benchmark::State& state) {
  const auto& field = torus_build(static_cast<int>(state.range(0))).field;
  const auto pts = unit_points(4096);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(field.evaluate(pts[i++ & 4095]));
}
BENCHMARK(BM_Evaluate)->Arg(4)->Arg(5)->Arg(6);

void BM_SolveQuartic(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<std::array<double, 5>> polys(1024);
  for (auto& p : polys)
    for (double& c : p) c = g(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = polys[i++ & 1023];
    benchmark::DoNotOptimize(solve_quartic(p[0], p[1], p[2], p[3], p[4]));
  }
}
BENCHMARK(BM_SolveQuartic);

void classify_loop(benchmark::State& state, FallbackPolicy policy, bool winding_only) {
  const auto& out = torus_build(6);
  const auto model = testing::make_torus(1.0, 0.35, 150, 100);
  const auto pts = sample_box(model.bounds(), static_cast<double>(state.range(0)), 4096, 11);
  std::size_t i = 0;
  for (auto _ : state) {
    const Vec3& p = pts[i++ & 4095];
    if (winding_only)
      benchmark::DoNotOptimize(winding_number(model, p));
    else
      benchmark::DoNotOptimize(classify(out.field, p, policy, &model));
  }
}

void BM_ClassifyOnSurface(benchmark::State& state) { classify_loop(state, FallbackPolicy::OnSurface, false); }
void BM_ClassifyExact(benchmark::State& state) { classify_loop(state, FallbackPolicy::Exact, false); }
void BM_WindingNumber(benchmark::State& state) { classify_loop(state, FallbackPolicy::Exact, true); }
BENCHMARK(BM_ClassifyOnSurface)->Arg(1)->Arg(2)->Arg(5)->Arg(10);
BENCHMARK(BM_ClassifyExact)->Arg(1)->Arg(2)->Arg(5)->Arg(10);
BENCHMARK(BM_WindingNumber)->Arg(1)->Arg(2)->Arg(5)->Arg(10);

void BM_BuildTorus(benchmark::State& state) {
  const auto model = testing::make_torus(1.0, 0.35, 60, 30);
  for (auto _ : state) benchmark::DoNotOptimize(build_field(model, static_cast<int>(state.range(0)), DistanceMode::Signed));
}
BENCHMARK(BM_BuildTorus)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
