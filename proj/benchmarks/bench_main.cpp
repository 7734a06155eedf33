#include <benchmark/benchmark.h>

#include <cmath>

#include "shrink/counting.hpp"
#include "shrink/cylinders.hpp"
#include "shrink/markov.hpp"
#include "shrink/measures.hpp"
#include "shrink/orbit.hpp"

using namespace shrink;

namespace {

void BM_DigitWalker(benchmark::State& state) {
    TorusSystem sys = DiagonalTorusSystem::make({RealConstant::integer(2), RealConstant::integer(3)});
    auto target = TargetSpec::ball({0.3, 0.7}, RateFunction::power_law(0.5, 0.25));
    std::vector<double> radii;
    uint64_t seed = 1;
    for (auto _ : state) {
        auto w = make_walker(sys, RandomPoint{seed++}, state.range(0));
        long long hits = 0;
        for (long long n = 1; n <= state.range(0); ++n) {
            w->advance();
            radii_into(target, n, radii);
            hits += w->test(target, radii) != Membership::No;
        }
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DigitWalker)->Arg(10000)->Arg(100000);

void BM_IntervalStep(benchmark::State& state) {
    auto prec = static_cast<mpfr_prec_t>(state.range(0));
    auto x0 = UnitRealInterval::from_constant(RealConstant::parse("pi-3"), prec);
    for (auto _ : state) {
        auto r = beta_step(RealConstant::golden(), x0);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_IntervalStep)->Arg(128)->Arg(1024)->Arg(8192);

void BM_CylinderEnumeration(benchmark::State& state) {
    auto beta = RealConstant::parse("2.5");
    for (auto _ : state) {
        auto rep = full_cylinder_gap(beta, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(rep);
    }
}
BENCHMARK(BM_CylinderEnumeration)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_ParryMeasure(benchmark::State& state) {
    for (auto _ : state) {
        ParryYrrapMeasure m(RealConstant::parse("1.5"));
        benchmark::DoNotOptimize(m.measure_interval(0.1, 0.6));
    }
}
BENCHMARK(BM_ParryMeasure);

void BM_MarkovBuild(benchmark::State& state) {
    auto map = power_map(-RealConstant::golden(), static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto s = build_markov(map);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_MarkovBuild)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_WordCount(benchmark::State& state) {
    auto s = build_markov(beta_map(RealConstant::integer(100)));
    for (auto _ : state) benchmark::DoNotOptimize(word_count(s.a, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_WordCount)->Arg(12)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
