#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "scnn/api_builder.hpp"
#include "scnn/synth.hpp"

using namespace scnn;
using namespace scnn::api;

namespace {

RgbImage flat(int w, int h, double v) { return RgbImage(w, h, v); }

FrameSequence noisy_sequence(std::size_t n, int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RgbImage> frames;
  for (std::size_t i = 0; i < n; ++i) {
    RgbImage f(w, h);
    for (double& v : f.pixels()) v = u(rng);
    frames.push_back(f);
  }
  return FrameSequence(frames);
}

}  // namespace

TEST(FrameSequence, RejectsMixedSizes) {
  EXPECT_THROW(FrameSequence({flat(4, 4, 0), flat(5, 4, 0)}), std::invalid_argument);
}

TEST(BackgroundModel, StaticVideoGivesItsGray) {
  RgbImage f(6, 5);
  std::mt19937_64 rng(1);
  for (double& v : f.pixels()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  const FrameSequence seq(std::vector<RgbImage>(7, f));
  EXPECT_EQ(background_model(seq), imaging::rgb_to_gray(f));
}

TEST(BackgroundModel, MedianOfThreeSamples) {
  // Three frames, stride clamps to 1: samples {0.2, 0.2, 0.9}.
  const FrameSequence seq({flat(2, 2, 0.2), flat(2, 2, 0.9), flat(2, 2, 0.2)});
  for (double v : background_model(seq).pixels()) EXPECT_NEAR(v, 0.2, 1e-12);
}

TEST(BackgroundModel, MatchesSortOracleOnRandomStacks) {
  for (std::size_t n : {3u, 4u, 9u, 12u, 26u}) {
    const FrameSequence seq = noisy_sequence(n, 5, 4, n);
    const std::size_t stride = std::min<std::size_t>(5, (n - 1) / 2);
    std::vector<GrayImage> samples;
    for (std::size_t i = 0; i < n; i += stride) samples.push_back(imaging::rgb_to_gray(seq[i]));
    ASSERT_GE(samples.size(), 3u);
    const GrayImage expect = oracle::median_background(samples);
    const GrayImage got = background_model(seq);
    for (std::size_t p = 0; p < got.size(); ++p) EXPECT_DOUBLE_EQ(got.pixels()[p], expect.pixels()[p]) << n;
  }
}

TEST(BackgroundModel, MovingSquareLeavesPureBackground) {
  synth::VideoOptions o;
  o.frames = 40;
  o.seed = 9;
  const FrameSequence seq = synth::synth_video(o);
  synth::VideoOptions still = o;
  still.kind = synth::VideoKind::Static;
  const GrayImage truth = imaging::rgb_to_gray(synth::synth_video(still)[0]);
  EXPECT_EQ(background_model(seq), truth);
}

TEST(BackgroundModel, TooFewFrames) {
  EXPECT_THROW(background_model(FrameSequence({flat(2, 2, 0), flat(2, 2, 0)})), InsufficientFramesError);
}

TEST(SubtractAndEnhance, FrameEqualToBackgroundIsZero) {
  const RgbImage f = flat(4, 4, 0.4);
  for (double v : subtract_and_enhance(f, imaging::rgb_to_gray(f)).pixels()) EXPECT_EQ(v, 0.0);
}

TEST(SubtractAndEnhance, GateIsStrictAndStretchIsLinear) {
  // Background 0; pixel values chosen so the frame max is 1 and the
  // normalized differences are exactly 0.3, 0.65 and 1.
  RgbImage f(3, 1, 0.0);
  const double vals[3] = {0.3, 0.65, 1.0};
  for (int x = 0; x < 3; ++x)
    for (int c = 0; c < 3; ++c) f.at(x, 0, c) = vals[x];
  const GrayImage out = subtract_and_enhance(f, GrayImage(3, 1, 0.0), Normalization::Fixed);
  EXPECT_EQ(out.at(0, 0), 0.0);
  EXPECT_NEAR(out.at(1, 0), 0.5, 1e-9);
  EXPECT_NEAR(out.at(2, 0), 1.0, 1e-9);
}

TEST(SubtractAndEnhance, FrameMaxNormalizationRescales) {
  RgbImage f(2, 1, 0.0);
  for (int c = 0; c < 3; ++c) {
    f.at(0, 0, c) = 0.2;
    f.at(1, 0, c) = 0.13;  // 0.65 of the max
  }
  const GrayImage out = subtract_and_enhance(f, GrayImage(2, 1, 0.0));
  EXPECT_NEAR(out.at(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(out.at(1, 0), 0.5, 1e-9);
}

TEST(SubtractAndEnhance, DimensionMismatch) {
  EXPECT_THROW(subtract_and_enhance(flat(4, 4, 0), GrayImage(4, 5, 0)), std::invalid_argument);
}

TEST(Accumulator, CountsAndMerge) {
  EdgeAccumulator a(3, 2), b(3, 2);
  BinaryImage e(3, 2, 0);
  e.at(1, 1) = 1;
  a.add(e);
  a.add(e);
  b.add(e);
  a.merge(b);
  EXPECT_EQ(a.count(1, 1), 3u);
  EXPECT_EQ(a.count(0, 0), 0u);
  EXPECT_EQ(a.frames(), 3u);
  EXPECT_THROW(a.add(BinaryImage(2, 2, 0)), std::invalid_argument);
}

TEST(Outline, BinarizeIsUnionOfAccumulators) {
  EdgeAccumulator a(4, 4), b(4, 4), both(4, 4);
  BinaryImage e1(4, 4, 0), e2(4, 4, 0);
  e1.at(0, 0) = 1;
  e2.at(3, 2) = 1;
  a.add(e1);
  b.add(e2);
  both.add(e1);
  both.add(e2);
  const BinaryImage oa = outline(a), ob = outline(b), oab = outline(both);
  for (std::size_t i = 0; i < oab.size(); ++i) EXPECT_EQ(oab.pixels()[i], oa.pixels()[i] | ob.pixels()[i]);
}

TEST(Outline, PerimeterKeepsOnlyTheRim) {
  EdgeAccumulator acc(5, 5);
  BinaryImage block(5, 5, 0);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) block.at(x, y) = 1;
  acc.add(block);
  const BinaryImage rim = outline(acc, Outline::Perimeter);
  EXPECT_EQ(rim.at(2, 2), 0);
  EXPECT_EQ(rim.at(1, 1), 1);
  EXPECT_EQ(rim.at(3, 2), 1);
  EXPECT_EQ(rim.at(0, 0), 0);
}

TEST(BuildApi, OutputIsAlways256) {
  const FrameSequence seq = noisy_sequence(5, 40, 30, 2);
  const ActionPatternImage a = build_api(seq);
  EXPECT_EQ(a.pixels.width(), 256);
  EXPECT_EQ(a.pixels.height(), 256);
  for (auto v : a.pixels.pixels()) EXPECT_LE(v, 1);
}

TEST(BuildApi, TenFramesProcessEveryOtherFrame) {
  const FrameSequence seq = noisy_sequence(10, 32, 32, 4);
  std::vector<std::size_t> seen;
  ApiOptions opts;
  opts.on_frame = [&](std::size_t i, const BinaryImage&) { seen.push_back(i); };
  build_api(seq, opts);
  // 0-based 0,2,4,6,8 are the 1st, 3rd, ... 9th frames.
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 2, 4, 6, 8}));
}

TEST(BuildApi, TranslateSquareEqualsPerFrameOracle) {
  synth::VideoOptions o;
  o.frames = 30;
  o.seed = 21;
  EXPECT_EQ(build_api(synth::synth_video(o)).pixels, oracle::per_frame_or_api(o));
}

TEST(BuildApi, WaveBarEqualsPerFrameOracle) {
  synth::VideoOptions o;
  o.kind = synth::VideoKind::WaveBar;
  o.frames = 32;
  o.seed = 4;
  EXPECT_EQ(build_api(synth::synth_video(o)).pixels, oracle::per_frame_or_api(o));
}

TEST(BuildApi, UnfilteredVariantMatchesUnfilteredOracle) {
  synth::VideoOptions o;
  o.frames = 20;
  ApiOptions opts;
  opts.direction_filter = false;
  const BinaryImage got = build_api(synth::synth_video(o), opts).pixels;
  EXPECT_EQ(got, oracle::per_frame_or_api(o, false));
  // The filtered API is a strict subset here: the square has horizontal sides.
  const BinaryImage filtered = build_api(synth::synth_video(o)).pixels;
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_LE(filtered.pixels()[i], got.pixels()[i]);
    a += filtered.pixels()[i];
    b += got.pixels()[i];
  }
  EXPECT_LT(a, b);
}

TEST(BuildApi, IlluminationAndBackgroundInvariance) {
  synth::VideoOptions o;
  o.frames = 40;
  o.seed = 1;
  const BinaryImage base = build_api(synth::synth_video(o)).pixels;
  for (double c : {0.5, 0.7, 0.93}) {
    synth::VideoOptions dim = o;
    dim.illumination = c;
    EXPECT_EQ(build_api(synth::synth_video(dim)).pixels, base) << c;
  }
  synth::VideoOptions other = o;
  other.seed = 987654;
  EXPECT_EQ(build_api(synth::synth_video(other)).pixels, base);
}

TEST(BuildApi, StaticVideoHasEmptyApi) {
  const ActionPatternImage a = build_api(synth::synth_video(synth::VideoKind::Static, 12, 3));
  for (auto v : a.pixels.pixels()) EXPECT_EQ(v, 0);
}

TEST(BuildApi, Deterministic) {
  const FrameSequence seq = noisy_sequence(7, 64, 48, 11);
  EXPECT_EQ(build_api(seq), build_api(seq));
}

TEST(BuildApi, Errors) {
  EXPECT_THROW(build_api(FrameSequence({flat(16, 16, 0), flat(16, 16, 1)})), InsufficientFramesError);
}
