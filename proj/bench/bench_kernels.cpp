#include <benchmark/benchmark.h>

#include <random>

#include "conelqr/kernels.hpp"

using conelqr::Matrix;
namespace kernels = conelqr::kernels;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(r, c);
    for (double& v : m.data()) v = g(rng);
    return m;
}

template <Matrix (*Fn)(const Matrix&, const Matrix&)>
void bm_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}

template <Matrix (*Fn)(const Matrix&, const Matrix&)>
void bm_kron(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(n, n, 3), b = random_matrix(n, n, 4);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n * n));
}

template <Matrix (*Fn)(const Matrix&, const Matrix&)>
void bm_congruence(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix c = random_matrix(n, n, 5), a = random_matrix(n, n, 6);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(c, a));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(2 * n * n * n));
}

}  // namespace

BENCHMARK(bm_matmul<kernels::serial::matmul>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_matmul<kernels::parallel::matmul>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(32, 256)->UseRealTime();
BENCHMARK(bm_matmul<kernels::serial::transpose_matmul>)->Name("transpose_matmul/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_matmul<kernels::parallel::transpose_matmul>)->Name("transpose_matmul/parallel")->RangeMultiplier(2)->Range(32, 256)->UseRealTime();
BENCHMARK(bm_kron<kernels::serial::kron>)->Name("kron/serial")->RangeMultiplier(2)->Range(8, 32);
BENCHMARK(bm_kron<kernels::parallel::kron>)->Name("kron/parallel")->RangeMultiplier(2)->Range(8, 32)->UseRealTime();
BENCHMARK(bm_congruence<kernels::serial::congruence>)->Name("congruence/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_congruence<kernels::parallel::congruence>)->Name("congruence/parallel")->RangeMultiplier(2)->Range(32, 256)->UseRealTime();

BENCHMARK_MAIN();
