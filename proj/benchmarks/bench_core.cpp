#include <benchmark/benchmark.h>

#include <smech/config.hpp>
#include <smech/density.hpp>
#include <smech/montecarlo.hpp>
#include <smech/operators.hpp>
#include <smech/semigroup.hpp>
#include <smech/verification.hpp>

using namespace smech;

namespace {

// Spring scaled as 1/L^2 keeps sup|V| fixed so every size stays admissible.
ModelSpec harmonic(int sites) {
    PresetOptions o;
    o.sites_per_axis = sites;
    o.spring = 1.0 / (static_cast<double>(sites) * sites);
    return make_preset(Preset::Harmonic, o);
}

void BM_Uniformize(benchmark::State& state) {
    const auto gen = build_lifted_generator(harmonic(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(uniformize(gen, 0.5));
}
BENCHMARK(BM_Uniformize)->Arg(8)->Arg(32)->Arg(64);

void BM_ExpmDense(benchmark::State& state) {
    const auto gen = build_lifted_generator(harmonic(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(expm_dense(gen, 0.5));
}
BENCHMARK(BM_ExpmDense)->Arg(8)->Arg(32)->Arg(64);

void BM_ExpmAction(benchmark::State& state) {
    const auto model = harmonic(static_cast<int>(state.range(0)));
    const auto gen = build_lifted_generator(model);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(gen.matrix.rows());
    v(0) = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(expm_action(gen, v, 0.5));
}
BENCHMARK(BM_ExpmAction)->Arg(64)->Arg(256)->Arg(1024);

void BM_MonteCarloKernel(benchmark::State& state) {
    const auto model = harmonic(16);
    const auto paths = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_lifted_kernel(model, 0, 0.5, paths, 1, {0, 1}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(paths));
}
BENCHMARK(BM_MonteCarloKernel)->Arg(10000)->Arg(100000);

void BM_EvolveJointDensity(benchmark::State& state) {
    const auto model = harmonic(static_cast<int>(state.range(0)));
    const auto joint = prepare_joint_density(pure_density(lattice_wavepacket(model)));
    for (auto _ : state) benchmark::DoNotOptimize(evolve_joint_density(joint, model, 0.3));
}
BENCHMARK(BM_EvolveJointDensity)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
