#include <benchmark/benchmark.h>

#include "rbmc/clustering.hpp"
#include "rbmc/kmeans.hpp"
#include "rbmc/rng.hpp"

using namespace rbmc;

namespace {

std::vector<Supervector> make_vectors(std::size_t count, std::size_t dim,
                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Supervector> vectors(count);
    for (std::size_t i = 0; i < count; ++i) {
        vectors[i].source_item = "item" + std::to_string(i);
        vectors[i].values.resize(dim);
        for (double& x : vectors[i].values) x = rng.next_gaussian();
    }
    return vectors;
}

SimilarityMatrix make_matrix(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    SimilarityMatrix m;
    for (std::size_t i = 0; i < n; ++i) m.ids.push_back("item" + std::to_string(i));
    m.scores.assign(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = 2.0 * rng.next_double() - 1.0;
            m.scores[i * n + j] = s;
            m.scores[j * n + i] = s;
        }
    }
    return m;
}

}  // namespace

static void BM_build_similarity_matrix(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto vectors = make_vectors(n, 560, 1);  // dim of a 16x32 supervector
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_similarity_matrix(vectors));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_build_similarity_matrix)->Arg(64)->Arg(200);

static void BM_ahc(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const SimilarityMatrix m = make_matrix(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ahc(m, Linkage::average, NumClustersStop{1}));
    }
}
BENCHMARK(BM_ahc)->Arg(64)->Arg(128)->Arg(256);

static void BM_sweep_threshold(benchmark::State& state) {
    const SimilarityMatrix m = make_matrix(128, 3);
    const std::vector<double> thetas{0.9, 0.7, 0.5, 0.3, 0.1, -0.1, -0.3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep_threshold(m, Linkage::average, thetas));
    }
}
BENCHMARK(BM_sweep_threshold);

static void BM_kmeans(benchmark::State& state) {
    const auto vectors = make_vectors(200, 560, 4);
    KMeansConfig config;
    config.k = 10;
    config.seed = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kmeans(vectors, config));
    }
}
BENCHMARK(BM_kmeans);

BENCHMARK_MAIN();
