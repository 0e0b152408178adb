// Microbenchmarks for the hot paths: Kronecker mode products, preconditioner
// setup/apply and the matrix-free residual.

#include <benchmark/benchmark.h>

#include "stiga/solver.hpp"

namespace {

using namespace stiga;

const ProblemSpec& square_problem() {
    static const ProblemSpec prob = make_problem("identity-square-2d");
    return prob;
}

void BM_kron_matvec(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DenseMatrix U = DenseMatrix::Random(n, n);
    const std::vector<KronFactor> factors{KronFactor(U), KronFactor(U), KronFactor(U)};
    const Vector x = Vector::Random(Index(n) * n * n);
    for (auto _ : state)
        benchmark::DoNotOptimize(kron_matvec(factors, x));
    state.SetComplexityN(Index(n) * n * n);
}
BENCHMARK(BM_kron_matvec)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_precond_setup(benchmark::State& state) {
    const int n_el = static_cast<int>(state.range(0));
    const SpaceTimeSystem sys(square_problem(), 2, n_el);
    for (auto _ : state)
        benchmark::DoNotOptimize(sys.make_geometry_preconditioner());
}
BENCHMARK(BM_precond_setup)->RangeMultiplier(2)->Range(8, 32);

void BM_precond_apply(benchmark::State& state) {
    const int n_el = static_cast<int>(state.range(0));
    const SpaceTimeSystem sys(square_problem(), 2, n_el);
    const ExtendedFDPreconditioner P = sys.make_geometry_preconditioner();
    const Vector r = Vector::Random(sys.n_dof());
    for (auto _ : state)
        benchmark::DoNotOptimize(P.apply(r));
    state.SetComplexityN(sys.n_dof());
}
BENCHMARK(BM_precond_apply)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_residual_matvec(benchmark::State& state) {
    const int n_el = static_cast<int>(state.range(0));
    const SpaceTimeSystem sys(square_problem(), 2, n_el);
    const Vector x = Vector::Random(sys.n_dof());
    for (auto _ : state)
        benchmark::DoNotOptimize(sys.system_operator().apply(x));
    state.SetComplexityN(sys.n_dof());
}
BENCHMARK(BM_residual_matvec)->RangeMultiplier(2)->Range(8, 64)->Complexity();

} // namespace

BENCHMARK_MAIN();
