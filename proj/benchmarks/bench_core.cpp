#include "qndi/bell.hpp"
#include "qndi/coherence.hpp"
#include "qndi/fock.hpp"
#include "qndi/interferometer.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace qndi;

void BM_CoherentState(benchmark::State& state) {
    const double a = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(coherent_state(a));
}
BENCHMARK(BM_CoherentState)->Arg(1)->Arg(4)->Arg(12);

void BM_FringeScan720(benchmark::State& state) {
    ArmConfig c;
    c.cell_arm3 = KerrCellSpec{0.4, 0.0, 0.0};
    const ProbeSpec p = make_probe(static_cast<double>(state.range(0)));
    const auto grid = theta_grid(720);
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_fringe(fringe_scan(c, p, grid)));
}
BENCHMARK(BM_FringeScan720)->Arg(0)->Arg(2)->Arg(4);

void BM_DephasedDoubleCell(benchmark::State& state) {
    ArmConfig c;
    c.cell_arm3 = KerrCellSpec{0.6, 0.0, 0.0};
    c.cell_arm2 = KerrCellSpec{0.3, 0.0, 0.0};
    const CoherenceSpec spec{1.0, 0.5, state.range(0) ? Lineshape::gaussian : Lineshape::lorentzian};
    const ProbeSpec p = make_probe(2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(run_with_coherence(c, p, spec));
}
BENCHMARK(BM_DephasedDoubleCell)->Arg(0)->Arg(1);

void BM_MaximizeChs(benchmark::State& state) {
    ChsSearchOptions opt;
    opt.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(maximize_chs(0.5, opt));
}
BENCHMARK(BM_MaximizeChs)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
