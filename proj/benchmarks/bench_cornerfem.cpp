#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "cornerfem/benchmark.hpp"
#include "cornerfem/solver.hpp"

using namespace cornerfem;

namespace {

constexpr double pi = std::numbers::pi;

TriangleMesh l_shape(int level) {
  StudySettings s;
  s.omega = 1.5 * pi;
  s.mu = {0.3};
  return build_study_mesh(build_sector_domain(s.omega), s, level);
}

void BM_BuildMesh(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(l_shape(level));
}

void BM_AssembleSystem(benchmark::State& state) {
  const auto mesh = l_shape(static_cast<int>(state.range(0)));
  AssemblyOptions options;
  options.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_system(mesh, options));
  state.counters["triangles"] = static_cast<double>(mesh.num_triangles());
}

void BM_AssembleLoad(benchmark::State& state) {
  const auto mesh = l_shape(static_cast<int>(state.range(0)));
  const auto bench = make_benchmark(1.5 * pi);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_load(mesh, bench.f_lin, bench.g));
}

void BM_Spmv(benchmark::State& state) {
  const auto a = assemble_system(l_shape(static_cast<int>(state.range(0))));
  const std::vector<double> x(a.n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(spmv(a, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz()));
}

void BM_CgSolve(benchmark::State& state) {
  const auto mesh = l_shape(static_cast<int>(state.range(0)));
  const auto bench = make_benchmark(1.5 * pi);
  const auto system = assemble(mesh, bench.f_lin, bench.g);
  std::size_t iterations = 0;
  for (auto _ : state) {
    const auto result = cg_solve(system.matrix, system.load);
    iterations = result.report.iterations;
    benchmark::DoNotOptimize(result.x);
  }
  state.counters["cg_iterations"] = static_cast<double>(iterations);
}

void BM_Newton(benchmark::State& state) {
  const auto mesh = l_shape(static_cast<int>(state.range(0)));
  const auto bench = make_benchmark(1.5 * pi);
  const auto exact = bench.exact;
  const auto problem = make_semilinear(
      [exact](Point x) {
        const double y = exact(x);
        return y + y * y * y;
      },
      bench.g, [](double y) { return y * y * y; }, [](double y) { return 3.0 * y * y; });
  for (auto _ : state) benchmark::DoNotOptimize(solve_semilinear(mesh, problem));
}

}  // namespace

BENCHMARK(BM_BuildMesh)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleSystem)->ArgsProduct({{5, 7}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleLoad)->DenseRange(5, 7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv)->DenseRange(5, 7)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CgSolve)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Newton)->DenseRange(4, 5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
