// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>

#include "kam/grid.hpp"
#include "kam/kernels.hpp"

namespace {

kam::Series random_series(int dim, int kmax, int mmax, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<std::pair<kam::Mode, kam::cplx>> coeffs;
    for (const auto& m : kam::taylor_indices(dim, mmax))
        for (const auto& k : kam::fourier_indices(dim, kmax)) {
            kam::Mode mode;
            mode.k = k;
            mode.m = m;
            int l1 = 0;
            for (int j = 0; j < dim; ++j) l1 += std::abs(k[j]);
            const double decay = std::exp(-0.5 * l1);
            coeffs.emplace_back(mode, kam::cplx{normal(rng) * decay, normal(rng) * decay});
        }
    return kam::Series::make(dim, kmax, mmax, coeffs);
}

void convolve(benchmark::State& state, bool parallel) {
    const int dim = static_cast<int>(state.range(0));
    const int kmax = static_cast<int>(state.range(1));
    const auto a = random_series(dim, kmax, 2, 1);
    const auto b = random_series(dim, kmax, 2, 2);
    for (auto _ : state) {
        auto p = parallel ? kam::kernels::convolve_parallel(a, b, kmax, 4, 0.1)
                          : kam::kernels::convolve_serial(a, b, kmax, 4, 0.1);
        benchmark::DoNotOptimize(p.value.size());
    }
    state.SetItemsProcessed(state.iterations() * a.size() * b.size());
}

void evaluate(benchmark::State& state, bool parallel) {
    const int dim = static_cast<int>(state.range(0));
    const int kmax = static_cast<int>(state.range(1));
    const auto a = random_series(dim, kmax, 0, 3);
    const auto grid = kam::make_grid(dim, kmax, 2);
    const auto pts = grid.points();
    std::vector<kam::cplx> out(grid.size());
    for (auto _ : state) {
        if (parallel)
            kam::kernels::evaluate_points_parallel(a, pts, {}, out);
        else
            kam::kernels::evaluate_points_serial(a, pts, {}, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * grid.size() * a.size());
}

void BM_ConvolveSerial(benchmark::State& s) { convolve(s, false); }
void BM_ConvolveParallel(benchmark::State& s) { convolve(s, true); }
void BM_EvaluateSerial(benchmark::State& s) { evaluate(s, false); }
void BM_EvaluateParallel(benchmark::State& s) { evaluate(s, true); }

}  // namespace

BENCHMARK(BM_ConvolveSerial)->Args({1, 64})->Args({2, 12});
BENCHMARK(BM_ConvolveParallel)->Args({1, 64})->Args({2, 12});
BENCHMARK(BM_EvaluateSerial)->Args({1, 64})->Args({2, 16});
BENCHMARK(BM_EvaluateParallel)->Args({1, 64})->Args({2, 16});

BENCHMARK_MAIN();
