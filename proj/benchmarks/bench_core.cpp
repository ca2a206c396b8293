#include <benchmark/benchmark.h>

#include <random>

#include "epiwave/char_solver.hpp"
#include "epiwave/operators.hpp"
#include "epiwave/relaxed_model.hpp"
#include "epiwave/svir.hpp"

using namespace epiwave;

namespace {

StateField random_state(std::size_t n, const Mesh& m) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    StateField f = StateField::zeros(n, m);
    for (double& v : f.values()) v = d(rng);
    for (double& v : f.slopes()) v = d(rng);
    return f;
}

}  // namespace

// Lambda(w) for the SVIR coupling on an na x nx grid.
void BM_LambdaOp(benchmark::State& st) {
    const auto na = static_cast<std::size_t>(st.range(0));
    const Mesh m = build_mesh(1.0, 1.0, na, na + 1);
    const ModelSpec spec = build_svir(SvirParams::reference(1.0), m);
    const StateField w = random_state(4, m);
    for (auto _ : st) benchmark::DoNotOptimize(lambda_op(spec.kernels, w, m));
    st.SetItemsProcessed(st.iterations() * static_cast<long>(m.age_nodes() * m.nx));
}
BENCHMARK(BM_LambdaOp)->Arg(20)->Arg(40)->Arg(80);

// One backward Euler step along a characteristic with four coupled compartments.
void BM_CharStep(benchmark::State& st) {
    const auto nx = static_cast<std::size_t>(st.range(0));
    const Mesh m = build_mesh(1.0, 1.0, 20, nx);
    const ModelSpec spec = build_svir(SvirParams::reference(1.0), m);
    const StateField y = random_state(4, m);
    const CharState s{y.value_slice(3), y.slope_slice(3)};
    const StepContext ctx = context_at(spec.linear, 4, 1e-3);
    for (auto _ : st) benchmark::DoNotOptimize(step(s, ctx, m));
    st.SetItemsProcessed(st.iterations() * static_cast<long>(nx));
}
BENCHMARK(BM_CharStep)->Arg(21)->Arg(81)->Arg(321);

// First time step of the relaxed SVIR model, Picard iteration included.
void BM_SvirTimeStep(benchmark::State& st) {
    const auto na = static_cast<std::size_t>(st.range(0));
    const Mesh m = build_mesh(1.0 / static_cast<double>(na), 1.0, na, na + 1);
    SvirParams p = SvirParams::reference(1.0);
    p.tau = 1e-3;
    const ModelSpec spec = build_svir(p, m);
    for (auto _ : st) benchmark::DoNotOptimize(run_relaxed(spec, SolverConfig{}, m));
}
BENCHMARK(BM_SvirTimeStep)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
