#include "qae/conv.hpp"
#include "qae/model.hpp"
#include "qae/quadratic.hpp"
#include "qae/training.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace qae;

namespace {

Tensor noise(Shape s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Tensor t(s);
    for (double& v : t.values()) v = d(rng);
    return t;
}

KernelBank bank(std::size_t out, std::size_t in, std::size_t k, std::uint64_t seed) {
    KernelBank b(out, in, k);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 0.1);
    for (double& v : b.values()) v = d(rng);
    return b;
}

// args: channels, image side
void BM_Conv2d(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const auto n = static_cast<std::size_t>(state.range(1));
    const Tensor x = noise(Shape{c, n, n}, 1);
    const KernelBank k = bank(c, c, 3, 2);
    const std::vector<double> b(c, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, b, PadMode::Same));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(c * c * n * n * 9));
}
BENCHMARK(BM_Conv2d)->Args({1, 64})->Args({15, 64})->Args({32, 64});

void BM_Conv2dTranspose(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const Tensor x = noise(Shape{c, 62, 62}, 1);
    const KernelBank k = bank(c, c, 3, 2);
    const std::vector<double> b(c, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d_transpose(x, k, b, PadMode::Valid));
}
BENCHMARK(BM_Conv2dTranspose)->Arg(15);

void BM_QuadraticLayerForward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const Tensor x = noise(Shape{c, 64, 64}, 3);
    auto p = QuadraticConvParams::zeros(c, c, 3);
    p.w_r = bank(c, c, 3, 4);
    p.w_g = bank(c, c, 3, 5);
    p.w_b = bank(c, c, 3, 6);
    const SpatialOp op{ConvDirection::Forward, PadMode::Same, 3};
    for (auto _ : state) benchmark::DoNotOptimize(quad_conv_forward(x, p, op, Activation::relu()));
}
BENCHMARK(BM_QuadraticLayerForward)->Arg(8)->Arg(15);

void BM_QuadraticLayerBackward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const Tensor x = noise(Shape{c, 64, 64}, 3);
    auto p = QuadraticConvParams::zeros(c, c, 3);
    p.w_r = bank(c, c, 3, 4);
    p.w_g = bank(c, c, 3, 5);
    p.w_b = bank(c, c, 3, 6);
    const SpatialOp op{ConvDirection::Forward, PadMode::Same, 3};
    const Tensor up = noise(Shape{c, 64, 64}, 7);
    for (auto _ : state) benchmark::DoNotOptimize(quad_backward(x, p, op, Activation::relu(), up));
}
BENCHMARK(BM_QuadraticLayerBackward)->Arg(8)->Arg(15);

// forward + backward of one 64x64 patch
void BM_ModelSample(benchmark::State& state) {
    const auto width = static_cast<std::size_t>(state.range(0));
    const NeuronKind kind = state.range(1) ? NeuronKind::Quadratic : NeuronKind::Conventional;
    const QAEModel m = build_qae(QAEConfig{width, 3, kind, Activation::relu()}, 1);
    const Tensor x = noise(Shape{1, 64, 64}, 8), t = noise(Shape{1, 64, 64}, 9);
    auto acc = m.zero_like();
    for (auto _ : state) benchmark::DoNotOptimize(sample_gradient(m, x, t, acc));
}
BENCHMARK(BM_ModelSample)->Args({8, 1})->Args({15, 1})->Args({15, 0})->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
    const QAEModel m = build_qae(QAEConfig{static_cast<std::size_t>(state.range(0)), 3, NeuronKind::Quadratic,
                                           Activation::relu()}, 1);
    const Tensor x = noise(Shape{1, 128, 128}, 8);
    for (auto _ : state) benchmark::DoNotOptimize(m.forward(x));
}
BENCHMARK(BM_ModelForward)->Arg(8)->Arg(15)->Unit(benchmark::kMillisecond);

// one epoch of 50 patches (a single optimizer step)
void BM_TrainStep(benchmark::State& state) {
    std::vector<PatchPair> data;
    for (std::uint64_t i = 0; i < 50; ++i) data.push_back({noise(Shape{1, 64, 64}, 10 + i), noise(Shape{1, 64, 64}, 100 + i)});
    const std::vector<PatchPair> val(data.begin(), data.begin() + 1);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.schedule = LrSchedule::standard(1);
    const QAEModel m = build_qae(QAEConfig{8, 3, NeuronKind::Quadratic, Activation::relu()}, 1);
    for (auto _ : state) benchmark::DoNotOptimize(train(m, data, val, cfg));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond)->Iterations(3);

} // namespace

BENCHMARK_MAIN();
