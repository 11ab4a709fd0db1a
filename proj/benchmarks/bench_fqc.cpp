#include <benchmark/benchmark.h>

#include <fqc/gates.hpp>
#include <fqc/readout.hpp>
#include <fqc/state_prep.hpp>

namespace {

using namespace fqc;

SpinParams params()
{
    SpinParams p;
    p.delta0 = kTwoPi * 500.0;
    p.delta = kTwoPi * 20000.0;
    p.eta = 0.5;
    p.alpha = kPi / 6;
    p.beta = kPi / 3;
    return p;
}

void BM_SidebandAmplitudes(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    const int K = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sideband_amplitudes(p, r, K).total);
}
BENCHMARK(BM_SidebandAmplitudes)->Arg(4)->Arg(16)->Arg(64);

// dense Hermitian eigensolve of the Floquet Hamiltonian, dimension 2(2K+1)
void BM_Diagonalize(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    auto h = cs_floquet_hamiltonian(p, r, ModeTruncation{static_cast<int>(state.range(0))});
    for (auto _ : state)
        benchmark::DoNotOptimize(diagonalize(h).eigenvalues.data());
    state.counters["dim"] = static_cast<double>(h.matrix.rows());
}
BENCHMARK(BM_Diagonalize)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_SteppedOracle(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    auto h = [&](double t) { return cs_hamiltonian(p, r, t); };
    for (auto _ : state)
        benchmark::DoNotOptimize(stepped_propagator_oracle(h, 2.0 * r.period(), static_cast<int>(state.range(0))).data());
}
BENCHMARK(BM_SteppedOracle)->Arg(1 << 10)->Arg(1 << 14)->Unit(benchmark::kMicrosecond);

void BM_SimulateFid(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    auto sigma = make_pseudo_pure({{1, 0}, 1.0}, ModeTruncation{1});
    SimulationOptions o{0, static_cast<int>(state.range(1)), 1};
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_fid(sigma, p, r, {static_cast<int>(state.range(0)), 0.0}, o).samples.data());
}
BENCHMARK(BM_SimulateFid)->Args({64, 16})->Args({128, 64})->Unit(benchmark::kMillisecond);

void BM_AnalyticSpectrum(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(spectrum_of(analytic_fid(1, 0, p, r, 12, Detection::quadrature, {n, 0.0})).amplitude.data());
}
BENCHMARK(BM_AnalyticSpectrum)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

// orientations per second is the figure of merit; threads should not change the bits
void BM_Powder(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    auto grid = PowderGrid::uniform(static_cast<int>(state.range(0)), 8);
    PowderOptions o;
    o.threads = static_cast<int>(state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(powder_spectrum(1, 0, p, r, 13, grid, {1024, 0.0}, o).spectrum.amplitude.data());
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.points.size()));
}
BENCHMARK(BM_Powder)->Args({144, 1})->Args({144, 2})->Args({576, 1})->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_GradientSandwich(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    ModeTruncation tr{8};
    auto rho = thermal_density(tr, 0.1, ThermalConvention::all_modes);
    GradientEvent g{Rational(2), Rational(1, 4000)};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            apply_gradient_sandwich(rho, g, RfPulse::ideal(kPi, RfPhase::x), g, p, r, static_cast<int>(state.range(0)), 1)
                .matrix.data());
}
BENCHMARK(BM_GradientSandwich)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_PassSweep(benchmark::State& state)
{
    auto thetas = equispaced_thetas(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_pass_sweep(5, thetas).data());
}
BENCHMARK(BM_PassSweep)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Grover(benchmark::State& state)
{
    const auto p = params();
    RotorConfig r;
    GroverInstance inst;
    inst.marked = {0, 1};
    GroverOptions o;
    o.compiled = state.range(0) != 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_grover(inst, p, r, ModeTruncation{1}, o).fidelity);
}
BENCHMARK(BM_Grover)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
