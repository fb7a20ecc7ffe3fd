#include <benchmark/benchmark.h>

#include <polymhd/mms.hpp>
#include <polymhd/newton.hpp>

using namespace polymhd;

namespace {

struct Fixture {
  PolyMesh mesh;
  Bases bases;
  std::vector<LocalOps> ops;
  DofLayout layout;
  Assembler assembler;

  Fixture(int n, int k)
      : mesh(build_cube_tet_mesh(n)),
        bases(Bases::build(mesh, k)),
        ops(build_local_ops(mesh, bases)),
        layout(mesh, k),
        assembler(mesh, bases, ops, layout,
                  mms_params(ExactSolution::standard(), 0.1, 0.1), 1) {}
};

void bench_local_ops(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const PolyMesh mesh = build_cube_tet_mesh(2);
  const Bases bases = Bases::build(mesh, k);
  for (auto _ : state) {
    LocalOps op(mesh, 0, bases);
    benchmark::DoNotOptimize(op.diffusion_scalar().data());
  }
}
BENCHMARK(bench_local_ops)->Arg(0)->Arg(1)->Arg(2);

void bench_residual_and_jacobian(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  static Fixture* fx0 = new Fixture(2, 0);
  static Fixture* fx1 = new Fixture(2, 1);
  Fixture& fx = (k == 0) ? *fx0 : *fx1;
  const VectorXd U = VectorXd::Constant(fx.layout.n_total(), 0.1);
  for (auto _ : state) {
    VectorXd G;
    SparseMat J;
    fx.assembler.residual_and_jacobian(U, G, J);
    benchmark::DoNotOptimize(G.data());
  }
}
BENCHMARK(bench_residual_and_jacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bench_condense(benchmark::State& state) {
  static Fixture* fx = new Fixture(2, 1);
  const VectorXd U = VectorXd::Constant(fx->layout.n_total(), 0.1);
  VectorXd G;
  SparseMat J;
  fx->assembler.residual_and_jacobian(U, G, J);
  for (auto _ : state) {
    SparseMat S;
    VectorXd rhs;
    EliminationRecord record;
    static_condense(J, G, fx->layout, S, rhs, record);
    benchmark::DoNotOptimize(S.nonZeros());
  }
}
BENCHMARK(bench_condense)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
