#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include <refine_sdo/ifipm.hpp>
#include <refine_sdo/newton.hpp>
#include <refine_sdo/refine.hpp>
#include <refine_sdo/solvers.hpp>

#include "generators.hpp"

using namespace refine_sdo;
using refine_sdo::testing::Rng;

static void BM_SymKron(benchmark::State& state)
{
    Rng rng(1);
    const Layout layout{static_cast<int>(state.range(0))};
    const BlockMatrix g = refine_sdo::testing::random_general(rng, layout);
    const BlockMatrix k = refine_sdo::testing::random_general(rng, layout);
    for (auto _ : state)
        benchmark::DoNotOptimize(sym_kron(g, k));
}
BENCHMARK(BM_SymKron)->Arg(5)->Arg(10)->Arg(20);

static void BM_SymKronApply(benchmark::State& state)
{
    Rng rng(2);
    const Layout layout{static_cast<int>(state.range(0))};
    const BlockMatrix g = refine_sdo::testing::random_general(rng, layout);
    const BlockMatrix k = refine_sdo::testing::random_general(rng, layout);
    const Vec v = rng.normal_vec(svec_length(layout));
    for (auto _ : state)
        benchmark::DoNotOptimize(sym_kron_apply(g, k, v));
}
BENCHMARK(BM_SymKronApply)->Arg(5)->Arg(10)->Arg(20);

static void BM_OssAssembleSolve(benchmark::State& state)
{
    Rng rng(3);
    const int n = static_cast<int>(state.range(0));
    const auto inst = refine_sdo::testing::random_standard_instance(rng, n, n);
    const ConstraintBasis basis = make_constraint_basis(inst.prob);
    const SymMat p = scaling_matrix(inst.start, Scaling::NT);
    for (auto _ : state) {
        const OssSystem sys = assemble_oss_standard(inst.prob, basis, inst.start, p, 0.9, 1.0);
        benchmark::DoNotOptimize(solve_direct(sys.M, sys.rhs));
    }
}
BENCHMARK(BM_OssAssembleSolve)->Arg(5)->Arg(10)->Arg(15);

static void BM_Solver(benchmark::State& state)
{
    Rng rng(4);
    const int n = static_cast<int>(state.range(0));
    const Mat m = rng.normal_mat(n, n) + 3.0 * std::sqrt(static_cast<double>(n)) * Mat::Identity(n, n);
    const Vec v = rng.normal_vec(n);
    const bool iterative = state.range(1) != 0;
    for (auto _ : state) {
        if (iterative)
            benchmark::DoNotOptimize(solve_iterative_normal(m, v, 1e-10 * v.norm(), 10 * n));
        else
            benchmark::DoNotOptimize(solve_direct(m, v));
    }
    state.SetLabel(iterative ? "iterative" : "direct");
}
BENCHMARK(BM_Solver)->Args({50, 0})->Args({50, 1})->Args({200, 0})->Args({200, 1});

static void BM_IpmStandard(benchmark::State& state)
{
    Rng rng(5);
    const int n = static_cast<int>(state.range(0));
    const auto inst = refine_sdo::testing::random_standard_instance(rng, n, n / 2);
    IpmConfig cfg;
    cfg.target_eps = 1e-2;
    for (auto _ : state)
        benchmark::DoNotOptimize(ipm_solve_standard(inst.prob, inst.start, cfg));
}
BENCHMARK(BM_IpmStandard)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_IrFeasible(benchmark::State& state)
{
    Rng rng(6);
    const auto inst = refine_sdo::testing::random_standard_instance(rng, 6, 4);
    IrOptions opt;
    opt.eps_final = 1e-12;
    const Oracle oracle = make_ifipm_oracle(IpmConfig{});
    spdlog::set_level(spdlog::level::warn);
    for (auto _ : state)
        benchmark::DoNotOptimize(ir_feasible(inst.prob, inst.start, opt, oracle));
}
BENCHMARK(BM_IrFeasible)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
