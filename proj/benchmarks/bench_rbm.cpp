#include <benchmark/benchmark.h>

#include "rbmc/rbm.hpp"
#include "rbmc/rng.hpp"

using namespace rbmc;

namespace {

RbmParams make_params(std::size_t visible, std::size_t hidden, std::uint64_t seed) {
    Rng rng(seed);
    RbmParams p = RbmParams::zeros(visible, hidden);
    for (double& w : p.weights) w = 0.01 * rng.next_gaussian();
    for (double& b : p.visible_bias) b = 0.1 * rng.next_gaussian();
    for (double& b : p.hidden_bias) b = 0.1 * rng.next_gaussian();
    return p;
}

std::vector<std::vector<double>> make_batch(std::size_t count, std::size_t dim,
                                            std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> batch(count, std::vector<double>(dim));
    for (auto& v : batch) {
        for (double& x : v) x = rng.next_gaussian();
    }
    return batch;
}

}  // namespace

// Paper-scale model: 80 visible, 400 hidden.
static void BM_hidden_given_visible(benchmark::State& state) {
    const RbmParams p = make_params(80, 400, 1);
    const auto batch = make_batch(1, 80, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hidden_given_visible(p, batch[0]));
    }
}
BENCHMARK(BM_hidden_given_visible);

static void BM_free_energy(benchmark::State& state) {
    const RbmParams p = make_params(80, 400, 3);
    const auto batch = make_batch(1, 80, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(free_energy(p, batch[0]));
    }
}
BENCHMARK(BM_free_energy);

static void BM_cd1_update(benchmark::State& state) {
    const std::size_t batch_size = static_cast<std::size_t>(state.range(0));
    const RbmParams p = make_params(80, 400, 5);
    const auto batch = make_batch(batch_size, 80, 6);
    Rng rng(7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cd1_update(p, batch, 0.0005, 0.0002, rng));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(batch_size));
}
BENCHMARK(BM_cd1_update)->Arg(1)->Arg(64)->Arg(100);

static void BM_adapt_item(benchmark::State& state) {
    // One item at adaptation defaults, scaled-down epochs.
    const RbmParams urbm = make_params(16, 32, 8);
    ItemFeatures item;
    item.item_id = "bench";
    item.frames = make_batch(5, 16, 9);
    TrainConfig config = adaptation_defaults();
    config.epochs = static_cast<std::size_t>(state.range(0));
    config.seed = 10;
    for (auto _ : state) {
        benchmark::DoNotOptimize(adapt(urbm, item, config));
    }
}
BENCHMARK(BM_adapt_item)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
