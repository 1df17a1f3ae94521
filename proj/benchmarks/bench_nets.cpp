#include <benchmark/benchmark.h>

#include "evc/compressor.hpp"
#include "evc/elbo.hpp"
#include "evc/evi_net.hpp"
#include "evc/rng.hpp"
#include "evc/vanilla_net.hpp"

using namespace evc;

namespace {

constexpr std::size_t kSide = 28;
constexpr std::size_t kBatch = 64;

Architecture mnist_arch(std::size_t kernels) {
    Architecture a;
    a.kernels = kernels;
    a.input_size = kSide;
    return a;
}

// Random images in [0,1], one contiguous block.
struct Images {
    explicit Images(std::size_t count) : px(count * kSide * kSide), labels(count) {
        RngStream rng(3, stream_id("bench"));
        for (auto& v : px) v = static_cast<float>(rng.uniform());
        for (auto& l : labels) l = static_cast<int>(rng.below(10));
    }
    std::span<const float> image(std::size_t i) const { return {px.data() + i * kSide * kSide, kSide * kSide}; }
    Batch batch() const {
        Batch b;
        for (std::size_t i = 0; i < labels.size(); ++i) b.images.push_back(image(i));
        b.labels = labels;
        return b;
    }
    std::vector<float> px;
    std::vector<int> labels;
};

void BM_Conv2dValid(benchmark::State& st) {
    Tensor x({kSide, kSide}, 0.5f), k({5, 5}, 0.1f);
    for (auto _ : st) benchmark::DoNotOptimize(conv2d_valid(x, k));
}
BENCHMARK(BM_Conv2dValid);

void BM_BayesPredict(benchmark::State& st) {
    const auto net = BayesianNet::initialized(mnist_arch(st.range(0)), 1);
    const Images img(1);
    for (auto _ : st) benchmark::DoNotOptimize(predict(img.image(0), net));
}
BENCHMARK(BM_BayesPredict)->Arg(25)->Arg(100);

void BM_VanillaForward(benchmark::State& st) {
    const auto net = VanillaNet::initialized(mnist_arch(st.range(0)), 1);
    const Images img(1);
    for (auto _ : st) benchmark::DoNotOptimize(forward_vanilla(img.image(0), net));
}
BENCHMARK(BM_VanillaForward)->Arg(25)->Arg(100);

void BM_GradElbo(benchmark::State& st) {
    const auto net = BayesianNet::initialized(mnist_arch(st.range(0)), 1);
    const Images img(kBatch);
    const Batch b = img.batch();
    for (auto _ : st) benchmark::DoNotOptimize(grad_elbo(net, b, PriorSpec{}, 1e-3));
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * kBatch));
}
BENCHMARK(BM_GradElbo)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GradCrossEntropy(benchmark::State& st) {
    const auto net = VanillaNet::initialized(mnist_arch(st.range(0)), 1);
    const Images img(kBatch);
    const Batch b = img.batch();
    for (auto _ : st) benchmark::DoNotOptimize(grad_cross_entropy(net, b));
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * kBatch));
}
BENCHMARK(BM_GradCrossEntropy)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RankAndPrune(benchmark::State& st) {
    const auto net = BayesianNet::initialized(mnist_arch(100), 1);
    const std::vector<std::size_t> drop = {3, 17, 42, 80};
    for (auto _ : st) {
        benchmark::DoNotOptimize(rank_kernels(net));
        benchmark::DoNotOptimize(prune(net, drop));
    }
}
BENCHMARK(BM_RankAndPrune);

}  // namespace

BENCHMARK_MAIN();
