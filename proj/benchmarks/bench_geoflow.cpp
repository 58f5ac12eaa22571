#include <benchmark/benchmark.h>

#include "geoflow/assembly.hpp"
#include "geoflow/schemes.hpp"
#include "geoflow/solver.hpp"

using namespace geoflow;

static void BM_GenIcosphere(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SurfaceMesh mesh = gen_icosphere(s);
    benchmark::DoNotOptimize(mesh.area());
  }
}
BENCHMARK(BM_GenIcosphere)->DenseRange(2, 5);

static void BM_GenCuboid(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    SurfaceMesh mesh = gen_cuboid(1.0, 1.0, 8.0, h);
    benchmark::DoNotOptimize(mesh.area());
  }
}
BENCHMARK(BM_GenCuboid)->Arg(5)->Arg(10);

static void BM_AssembleOperators(benchmark::State& state) {
  const SurfaceMesh mesh = gen_icosphere(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    OperatorSet ops = assemble_operators(mesh);
    benchmark::DoNotOptimize(ops.lumped_mass.data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.n_triangles());
}
BENCHMARK(BM_AssembleOperators)->DenseRange(2, 5);

static void BM_AssembleSymmetricGradient(benchmark::State& state) {
  const SurfaceMesh mesh = gen_icosphere(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    OperatorSet ops =
        assemble_operators(mesh, TangentialForm::SymmetricGradient);
    benchmark::DoNotOptimize(ops.tangential_form.nnz());
  }
  state.SetItemsProcessed(state.iterations() * mesh.n_triangles());
}
BENCHMARK(BM_AssembleSymmetricGradient)->DenseRange(2, 4);

static void BM_SpmvVectorStiffness(benchmark::State& state) {
  const SurfaceMesh mesh = gen_icosphere(static_cast<int>(state.range(0)));
  const OperatorSet ops = assemble_operators(mesh);
  std::vector<double> x(ops.vector_stiffness.cols(), 1.0);
  for (auto _ : state) {
    std::vector<double> y = spmv(ops.vector_stiffness, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * ops.vector_stiffness.nnz());
}
BENCHMARK(BM_SpmvVectorStiffness)->DenseRange(3, 5);

template <SchemeKind Kind>
static void BM_Step(benchmark::State& state) {
  const SurfaceMesh mesh = gen_icosphere(static_cast<int>(state.range(0)));
  const OperatorSet ops = assemble_operators(mesh);
  StepParams p;
  p.tau = 1e-3;
  for (auto _ : state) {
    StepSolution sol = take_step(mesh, ops, Kind, p);
    benchmark::DoNotOptimize(sol.v.data());
  }
}
BENCHMARK(BM_Step<SchemeKind::DziukMcf>)->DenseRange(2, 4);
BENCHMARK(BM_Step<SchemeKind::BgnMcf>)->DenseRange(2, 4);
BENCHMARK(BM_Step<SchemeKind::MdrMcf>)->DenseRange(2, 4);
BENCHMARK(BM_Step<SchemeKind::DualMdrMcf>)->DenseRange(2, 4);
BENCHMARK(BM_Step<SchemeKind::BgnSd>)->DenseRange(2, 4);
BENCHMARK(BM_Step<SchemeKind::DualMdrSd>)->DenseRange(2, 4);

static void BM_StepDewetting(benchmark::State& state) {
  const SurfaceMesh mesh =
      gen_cuboid(1.0, 6.0, 1.0, 1.0 / static_cast<double>(state.range(0)),
                 true);
  const OperatorSet ops = assemble_operators(mesh);
  StepParams p;
  p.tau = 1e-3;
  p.theta = 2.0943951023931953;  // 120 degrees
  for (auto _ : state) {
    StepSolution sol = take_step(mesh, ops, SchemeKind::DualMdrDewetting, p);
    benchmark::DoNotOptimize(sol.v.data());
  }
}
BENCHMARK(BM_StepDewetting)->Arg(5)->Arg(10);

static void BM_GmresStep(benchmark::State& state) {
  const SurfaceMesh mesh = gen_icosphere(static_cast<int>(state.range(0)));
  const OperatorSet ops = assemble_operators(mesh);
  StepParams p;
  p.tau = 1e-3;
  p.solver.method = SolveMethod::Gmres;
  for (auto _ : state) {
    StepSolution sol = take_step(mesh, ops, SchemeKind::BgnMcf, p);
    benchmark::DoNotOptimize(sol.v.data());
  }
}
BENCHMARK(BM_GmresStep)->DenseRange(2, 4);

BENCHMARK_MAIN();
