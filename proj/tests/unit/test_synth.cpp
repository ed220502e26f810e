#include <gtest/gtest.h>

#include "scnn/synth.hpp"

using namespace scnn;
using namespace scnn::synth;

namespace {

// Centroid of pixels at the foreground level in the first channel.
std::pair<double, double> foreground_centroid(const imaging::RgbImage& f) {
  double sx = 0, sy = 0, n = 0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      if (f.at(x, y, 0) == kForegroundLevel) {
        sx += x;
        sy += y;
        n += 1;
      }
  return {sx / n, sy / n};
}

}  // namespace

TEST(SynthVideo, StaticFramesAreIdentical) {
  const api::FrameSequence seq = synth_video(VideoKind::Static, 6, 4);
  for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_EQ(seq[i], seq[0]);
  EXPECT_EQ(foreground_box(VideoOptions{VideoKind::Static}, 0).w, 0);
}

TEST(SynthVideo, SquareMovesLinearly) {
  VideoOptions o;
  o.frames = 11;
  const api::FrameSequence seq = synth_video(o);
  const auto c0 = foreground_centroid(seq[0]);
  const auto c1 = foreground_centroid(seq[1]);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto c = foreground_centroid(seq[i]);
    const Box b = foreground_box(o, i);
    EXPECT_NEAR(c.first, b.x + (b.w - 1) / 2.0, 1e-9);
    EXPECT_NEAR(c.second, c0.second, 1e-9);
    // step is constant up to pixel rounding
    EXPECT_NEAR(c.first - c0.first, i * (c1.first - c0.first), 1.0);
  }
  EXPECT_GT(c1.first, c0.first);
  const Box last = foreground_box(o, o.frames - 1);
  EXPECT_LE(last.x + last.w, o.width);
}

TEST(SynthVideo, ForegroundIndependentOfSeed) {
  VideoOptions a, b;
  a.kind = b.kind = VideoKind::WaveBar;
  a.seed = 1;
  b.seed = 2;
  for (std::size_t i = 0; i < a.frames; ++i) {
    const Box ba = foreground_box(a, i), bb = foreground_box(b, i);
    EXPECT_EQ(ba.x, bb.x);
    EXPECT_EQ(ba.y, bb.y);
    EXPECT_EQ(ba.w, bb.w);
  }
  EXPECT_FALSE(synth_video(a)[0] == synth_video(b)[0]);
}

TEST(SynthVideo, IlluminationScalesSamples) {
  VideoOptions o;
  o.frames = 2;
  o.width = o.height = 64;
  VideoOptions dim = o;
  dim.illumination = 0.5;
  const auto a = synth_video(o), b = synth_video(dim);
  for (std::size_t p = 0; p < a[1].size(); ++p) EXPECT_NEAR(b[1].pixels()[p], 0.5 * a[1].pixels()[p], 1e-12);
}

TEST(SynthVideo, Errors) {
  VideoOptions o;
  o.frames = 0;
  EXPECT_THROW(synth_video(o), std::invalid_argument);
  o = {};
  o.width = 16;
  EXPECT_THROW(synth_video(o), std::invalid_argument);
  o = {};
  o.illumination = 0;
  EXPECT_THROW(synth_video(o), std::invalid_argument);
  EXPECT_THROW(parse_video_kind("spiral"), std::invalid_argument);
  EXPECT_EQ(parse_video_kind(video_kind_name(VideoKind::WaveBar)), VideoKind::WaveBar);
}

TEST(Glyphs, DeterministicBinaryAndVaried) {
  for (int cls = 0; cls < kGlyphClasses; ++cls) {
    const auto g = glyph(cls, 32, 5);
    EXPECT_EQ(g, glyph(cls, 32, 5));
    EXPECT_FALSE(g == glyph(cls, 32, 6));
    std::size_t on = 0;
    for (auto v : g.pixels()) {
      EXPECT_LE(v, 1);
      on += v;
    }
    EXPECT_GT(on, 10u) << cls;
  }
  EXPECT_THROW(glyph(6, 32, 0), std::invalid_argument);
  EXPECT_THROW(glyph(0, 8, 0), std::invalid_argument);
}

TEST(Glyphs, DatasetInClassOrder) {
  const auto d = glyph_dataset(3, 4, 16, 9);
  ASSERT_EQ(d.size(), 12u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i].label, static_cast<int>(i / 4));
  EXPECT_THROW(glyph_dataset(7, 1, 16, 0), std::invalid_argument);
}
