// Parallel kernels against their serial references, plus one training step.
// Set OMP_NUM_THREADS to compare thread counts.

#include <benchmark/benchmark.h>

#include <vector>

#include "hgnn/kernels.hpp"
#include "hgnn/rng.hpp"
#include "hgnn/training.hpp"

namespace {

using Gemm = void (*)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
    hgnn::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

template <Gemm F>
void BM_Gemm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_buffer(n * n, 1), b = random_buffer(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        F(a.data(), b.data(), c.data(), n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}

template <void (*F)(const double*, std::size_t, std::size_t, double*)>
void BM_Distances(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 64;
    const auto x = random_buffer(d * n, 3);
    std::vector<double> out(n * n);
    for (auto _ : state) {
        F(x.data(), d, n, out.data());
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_TrainingStep(benchmark::State& state) {
    hgnn::SyntheticSpec s;
    s.num_tasks = 4;
    s.num_classes = 3;
    s.feature_dim = 16;
    s.samples_per_class = 30;
    const hgnn::MultiTaskDataset d = generate_synthetic_mtl(s);
    hgnn::ModelConfig c;
    const hgnn::HgnnModel model = hgnn::make_model(hgnn::complete_config(c, d), 1);
    for (auto _ : state) benchmark::DoNotOptimize(hgnn::loss_and_gradient(model, d, d).loss);
}

}  // namespace

BENCHMARK(BM_Gemm<hgnn::kernels::gemm_nn>)->Name("gemm_nn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Gemm<hgnn::kernels::reference::gemm_nn>)->Name("gemm_nn/reference")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Gemm<hgnn::kernels::gemm_tn>)->Name("gemm_tn/parallel")->Arg(128);
BENCHMARK(BM_Gemm<hgnn::kernels::reference::gemm_tn>)->Name("gemm_tn/reference")->Arg(128);
BENCHMARK(BM_Gemm<hgnn::kernels::gemm_nt>)->Name("gemm_nt/parallel")->Arg(128);
BENCHMARK(BM_Gemm<hgnn::kernels::reference::gemm_nt>)->Name("gemm_nt/reference")->Arg(128);
BENCHMARK(BM_Distances<hgnn::kernels::pairwise_sq_distances>)->Name("pairwise_sq_distances/parallel")->Arg(90)->Arg(360);
BENCHMARK(BM_Distances<hgnn::kernels::reference::pairwise_sq_distances>)
    ->Name("pairwise_sq_distances/reference")
    ->Arg(90)
    ->Arg(360);
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
