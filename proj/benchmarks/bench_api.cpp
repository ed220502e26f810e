#include <benchmark/benchmark.h>

#include "scnn/api_builder.hpp"
#include "scnn/imaging.hpp"
#include "scnn/synth.hpp"

using namespace scnn;

namespace {

void BM_CannyVertical(benchmark::State& state) {
  const api::FrameSequence seq = synth::synth_video(synth::VideoKind::WaveBar, 1, 5);
  const imaging::GrayImage gray = imaging::rgb_to_gray(seq[0]);
  for (auto _ : state) benchmark::DoNotOptimize(imaging::canny_vertical(gray));
}
BENCHMARK(BM_CannyVertical)->Unit(benchmark::kMillisecond);

void BM_BuildApi(benchmark::State& state) {
  const api::FrameSequence seq =
      synth::synth_video(synth::VideoKind::TranslateSquare, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(api::build_api(seq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildApi)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
