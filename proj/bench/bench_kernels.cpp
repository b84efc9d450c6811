// Serial reference vs OpenMP kernels, plus the benchmark workload they serve.
// Run with --benchmark_filter to pick a kernel.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "sctrim/cli.hpp"
#include "sctrim/gpsim.hpp"
#include "sctrim/kernels.hpp"

using namespace sctrim;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0, 1);
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = N(rng);
    return M;
}

template <bool Parallel>
void BM_assign(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Eigen::MatrixXd P = random_matrix(n, 8, 1), C = random_matrix(10, 8, 2);
    std::vector<int> labels(n, -1);
    for (auto _ : state) {
        std::fill(labels.begin(), labels.end(), -1);
        benchmark::DoNotOptimize(Parallel ? kernels::assign_parallel(P, C, labels)
                                          : kernels::assign_serial(P, C, labels));
    }
    state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_pairwise(benchmark::State& state) {
    const Eigen::MatrixXd P = random_matrix(static_cast<int>(state.range(0)), 6, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? kernels::pairwise_distances_parallel(P)
                                          : kernels::pairwise_distances_serial(P));
    }
}

template <bool Parallel>
void BM_candidate_r2(benchmark::State& state) {
    const int J = static_cast<int>(state.range(0));
    const Eigen::MatrixXd D = random_matrix(30, J, 4);
    const Eigen::VectorXd y = random_matrix(30, 1, 5).col(0);
    const std::vector<int> selected{0, 1, 2};
    std::vector<int> candidates(J - 3);
    std::iota(candidates.begin(), candidates.end(), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? kernels::candidate_r2_parallel(y, D, selected, candidates)
                                          : kernels::candidate_r2_serial(y, D, selected, candidates));
    }
}

template <bool Parallel>
void BM_kernel_matrix(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const KernelSpec k = KernelSpec::sum(
        {KernelSpec::product({KernelSpec::constant(16.0), KernelSpec::exp_sine_squared(1.0, 7.0)}),
         KernelSpec::white(4.0)});
    const kernels::EntryFn entry = [&](int i, int j) { return k(i + 1.0, j + 1.0, i == j); };
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? kernels::symmetric_fill_parallel(n, entry)
                                          : kernels::symmetric_fill_serial(n, entry));
    }
}

void BM_benchmark_replication(benchmark::State& state) {
    cli::RunConfig cfg;
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(cli::benchmark_rows(cfg, {seed++}));
}

}  // namespace

BENCHMARK(BM_assign<false>)->Arg(1000)->Arg(20000);
BENCHMARK(BM_assign<true>)->Arg(1000)->Arg(20000);
BENCHMARK(BM_pairwise<false>)->Arg(160)->Arg(800);
BENCHMARK(BM_pairwise<true>)->Arg(160)->Arg(800);
BENCHMARK(BM_candidate_r2<false>)->Arg(40)->Arg(160);
BENCHMARK(BM_candidate_r2<true>)->Arg(40)->Arg(160);
BENCHMARK(BM_kernel_matrix<false>)->Arg(40)->Arg(400);
BENCHMARK(BM_kernel_matrix<true>)->Arg(40)->Arg(400);
BENCHMARK(BM_benchmark_replication)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
