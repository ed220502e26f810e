#include "scnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace scnn::synth {
namespace {

struct Band {
  int y0;
  int y1;  // exclusive
};

// Same rows for every kind, so a static clip shares its scene with the
// moving ones generated from the same seed.
Band motion_band(const VideoOptions& o) {
  const int fh = std::max(4, o.height / 4);
  const int margin = std::max(4, o.height / 16);
  const int top = (o.height - fh) / 2;
  return {std::max(0, top - margin), std::min(o.height, top + fh + margin)};
}

imaging::RgbImage background(const VideoOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double base = 0.05 + 0.25 * unit(rng);
  imaging::RgbImage bg(o.width, o.height);
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      for (int c = 0; c < 3; ++c) bg.at(x, y, c) = base;
    }
  }
  // Static texture outside the motion band: seeded noise plus a few blocks.
  const Band band = motion_band(o);
  std::normal_distribution<double> noise(0.0, 0.04);
  for (int y = 0; y < o.height; ++y) {
    if (y >= band.y0 && y < band.y1) continue;
    for (int x = 0; x < o.width; ++x) {
      for (int c = 0; c < 3; ++c) bg.at(x, y, c) = std::clamp(base + noise(rng), 0.0, 1.0);
    }
  }
  std::uniform_int_distribution<int> px(0, o.width - 1);
  std::uniform_int_distribution<int> py(0, o.height - 1);
  for (int k = 0; k < 6; ++k) {
    const int x0 = px(rng), y0 = py(rng);
    const int w = 4 + px(rng) % std::max(1, o.width / 6);
    const int h = 4 + py(rng) % std::max(1, o.height / 6);
    const double rgb[3] = {unit(rng), unit(rng), unit(rng)};
    for (int y = y0; y < std::min(o.height, y0 + h); ++y) {
      if (y >= band.y0 && y < band.y1) continue;
      for (int x = x0; x < std::min(o.width, x0 + w); ++x) {
        for (int c = 0; c < 3; ++c) bg.at(x, y, c) = rgb[c];
      }
    }
  }
  return bg;
}

void put(imaging::BinaryImage& img, int x, int y, int thickness) {
  for (int dy = 0; dy < thickness; ++dy) {
    for (int dx = 0; dx < thickness; ++dx) {
      const int xx = x + dx, yy = y + dy;
      if (xx >= 0 && yy >= 0 && xx < img.width() && yy < img.height()) img.at(xx, yy) = 1;
    }
  }
}

void line(imaging::BinaryImage& img, double x0, double y0, double x1, double y1, int thickness) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    put(img, static_cast<int>(std::lround(x0 + t * (x1 - x0))),
        static_cast<int>(std::lround(y0 + t * (y1 - y0))), thickness);
  }
}

void ellipse(imaging::BinaryImage& img, double cx, double cy, double rx, double ry, int thickness) {
  const int steps = static_cast<int>(8 * std::max(rx, ry)) + 16;
  for (int i = 0; i < steps; ++i) {
    const double a = 2.0 * std::numbers::pi * i / steps;
    put(img, static_cast<int>(std::lround(cx + rx * std::cos(a))),
        static_cast<int>(std::lround(cy + ry * std::sin(a))), thickness);
  }
}

}  // namespace

VideoKind parse_video_kind(std::string_view name) {
  if (name == "translate-square") return VideoKind::TranslateSquare;
  if (name == "wave-bar") return VideoKind::WaveBar;
  if (name == "static") return VideoKind::Static;
  throw std::invalid_argument("unknown synthetic video kind '" + std::string(name) +
                              "' (translate-square, wave-bar, static)");
}

std::string_view video_kind_name(VideoKind kind) {
  switch (kind) {
    case VideoKind::TranslateSquare: return "translate-square";
    case VideoKind::WaveBar: return "wave-bar";
    case VideoKind::Static: return "static";
  }
  return "?";
}

Box foreground_box(const VideoOptions& o, std::size_t frame) {
  switch (o.kind) {
    case VideoKind::TranslateSquare: {
      const int side = std::max(2, std::min(o.width, o.height) * 20 / 256);
      const int start = side;
      const int travel = std::max(0, o.width - 2 * side - start);
      // Whole-pixel steps keep every frame free of partial coverage.
      const int step =
          o.frames > 1 ? std::max(1, travel / static_cast<int>(o.frames - 1)) : 0;
      const int x = std::min(start + static_cast<int>(frame) * step, o.width - side);
      return {x, (o.height - side) / 2, side, side};
    }
    case VideoKind::WaveBar: {
      const int bw = std::max(2, o.width / 32);
      const int bh = std::max(4, o.height / 4);
      const double amp = o.width / 4.0;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(frame) / 16.0;
      const int x = static_cast<int>(std::lround(o.width / 2.0 - bw / 2.0 + amp * std::sin(phase)));
      return {x, (o.height - bh) / 2, bw, bh};
    }
    case VideoKind::Static:
      return {};
  }
  return {};
}

api::FrameSequence synth_video(const VideoOptions& o) {
  if (o.frames == 0) throw std::invalid_argument("synthetic video needs at least one frame");
  if (o.width < 32 || o.height < 32) throw std::invalid_argument("synthetic frames must be at least 32x32");
  if (!(o.illumination > 0.0)) throw std::invalid_argument("illumination must be > 0");
  const imaging::RgbImage bg = background(o);
  std::vector<imaging::RgbImage> frames;
  frames.reserve(o.frames);
  for (std::size_t i = 0; i < o.frames; ++i) {
    imaging::RgbImage f = bg;
    const Box b = foreground_box(o, i);
    for (int y = std::max(0, b.y); y < std::min(o.height, b.y + b.h); ++y) {
      for (int x = std::max(0, b.x); x < std::min(o.width, b.x + b.w); ++x) {
        for (int c = 0; c < 3; ++c) f.at(x, y, c) = kForegroundLevel;
      }
    }
    if (o.illumination != 1.0) {
      for (double& v : f.pixels()) v *= o.illumination;
    }
    frames.push_back(std::move(f));
  }
  return api::FrameSequence(std::move(frames));
}

api::FrameSequence synth_video(VideoKind kind, std::size_t frames, std::uint64_t seed) {
  VideoOptions o;
  o.kind = kind;
  o.frames = frames;
  o.seed = seed;
  return synth_video(o);
}

imaging::BinaryImage glyph(int cls, int side, std::uint64_t seed) {
  if (cls < 0 || cls >= kGlyphClasses) throw std::invalid_argument("glyph class out of range");
  if (side < 16) throw std::invalid_argument("glyph canvas must be at least 16 pixels");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = side;
  const double cx = s / 2 + (unit(rng) - 0.5) * s * 0.15;
  const double cy = s / 2 + (unit(rng) - 0.5) * s * 0.15;
  const double half = s * (0.28 + 0.1 * unit(rng));
  const int t = side >= 48 ? 1 + static_cast<int>(unit(rng) * 2.0) : 1;
  imaging::BinaryImage img(side, side, 0);

  switch (cls) {
    case 0: {
      const double gap = half * (0.4 + 0.3 * unit(rng));
      line(img, cx - gap, cy - half, cx - gap, cy + half, t);
      line(img, cx + gap, cy - half, cx + gap, cy + half, t);
      break;
    }
    case 1:
      line(img, cx - half, cy - half, cx + half, cy - half, t);
      line(img, cx + half, cy - half, cx + half, cy + half, t);
      line(img, cx + half, cy + half, cx - half, cy + half, t);
      line(img, cx - half, cy + half, cx - half, cy - half, t);
      break;
    case 2:
      line(img, cx - half, cy - half, cx + half, cy + half, t);
      line(img, cx - half, cy + half, cx + half, cy - half, t);
      break;
    case 3:
      for (int k = -1; k <= 1; ++k) {
        const double y = cy + k * half * 0.7;
        line(img, cx - half, y, cx + half, y, t);
      }
      break;
    case 4:
      ellipse(img, cx, cy, half, half * (0.6 + 0.3 * unit(rng)), t);
      break;
    case 5: {
      const double tilt = half * (0.5 + 0.4 * unit(rng));
      line(img, cx - tilt, cy - half, cx + tilt, cy + half * 0.6, t);
      line(img, cx - half, cy + half, cx + half, cy + half, t);
      break;
    }
  }
  // Sparse speckle, as left behind by imperfect background subtraction.
  std::bernoulli_distribution speckle(0.004);
  for (auto& p : img.pixels()) {
    if (speckle(rng)) p = 1;
  }
  return img;
}

std::vector<LabeledImage> glyph_dataset(int classes, std::size_t per_class, int side,
                                        std::uint64_t seed) {
  if (classes < 1 || classes > kGlyphClasses) throw std::invalid_argument("glyph class count out of range");
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(classes) * per_class);
  std::mt19937_64 seeds(seed);
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) out.push_back({glyph(c, side, seeds()), c});
  }
  return out;
}

}  // namespace scnn::synth
