#include <benchmark/benchmark.h>

#include <random>

#include "scnn/architecture.hpp"
#include "scnn/layers.hpp"
#include "scnn/network.hpp"
#include "scnn/synth.hpp"
#include "scnn/training.hpp"

using namespace scnn;

namespace {

nn::Tensor<float> filled(const nn::Shape& shape, std::uint64_t seed) {
  nn::Tensor<float> t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (float& v : t.values()) v = u(rng);
  return t;
}

// args: side, cin, cout (3x3, stride 1, pad 1, batch 4)
void BM_ConvForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1)), cout = static_cast<std::size_t>(state.range(2));
  const auto x = filled({4, side, side, cin}, 1);
  const auto w = filled({3, 3, cin, cout}, 2);
  const auto b = filled({cout}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_forward(x, w, b, nn::ConvGeometry{1, 1}));
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_ConvForward)->Args({256, 1, 8})->Args({64, 16, 32})->Args({16, 64, 128})->Unit(benchmark::kMillisecond);

void BM_ConvBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1)), cout = static_cast<std::size_t>(state.range(2));
  const auto x = filled({4, side, side, cin}, 1);
  const auto w = filled({3, 3, cin, cout}, 2);
  const auto g = filled({4, side, side, cout}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_backward(x, w, g, nn::ConvGeometry{1, 1}));
}
BENCHMARK(BM_ConvBackward)->Args({64, 16, 32})->Args({16, 64, 128})->Unit(benchmark::kMillisecond);

void BM_CompactTrainStep(benchmark::State& state) {
  const auto data = synth::glyph_dataset(5, 9, 64, 1);
  const nn::NetworkSpec spec = build_compact_scnn(5, 64);
  nn::Network<float> net(spec, nn::init_params<float>(spec, 1));
  std::vector<const imaging::BinaryImage*> images;
  std::vector<int> targets;
  for (const auto& s : data) {
    images.push_back(&s.image);
    targets.push_back(s.label);
  }
  const auto batch = make_batch<float>(std::span<const imaging::BinaryImage* const>(images));
  for (auto _ : state) {
    auto r = net.compute_gradients(batch, targets);
    train::sgdm_step(net.params(), r.grads, 0.01, 0.9, 0.004);
    benchmark::DoNotOptimize(r.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}
BENCHMARK(BM_CompactTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
