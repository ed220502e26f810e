#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "scnn/api_builder.hpp"
#include "scnn/dataset.hpp"

namespace scnn::synth {

enum class VideoKind { TranslateSquare, WaveBar, Static };

VideoKind parse_video_kind(std::string_view name);
std::string_view video_kind_name(VideoKind kind);

struct VideoOptions {
  VideoKind kind = VideoKind::TranslateSquare;
  std::size_t frames = 40;
  std::uint64_t seed = 0;
  int width = 256;
  int height = 256;
  /// Multiplies every sample; 1 keeps the generated levels.
  double illumination = 1.0;
};

/// Pixel-aligned foreground rectangle of one frame.
struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
};

/// Foreground geometry depends only on kind, frame count and frame size,
/// never on the seed. Static clips have no foreground (w == h == 0).
Box foreground_box(const VideoOptions& opts, std::size_t frame);

inline constexpr double kForegroundLevel = 0.9;

/// The foreground moves through a horizontal band of uniform level. The rest
/// of the scene is a static seeded texture, so the temporal median recovers
/// the background exactly and the foreground is the only change.
api::FrameSequence synth_video(const VideoOptions& opts);
api::FrameSequence synth_video(VideoKind kind, std::size_t frames, std::uint64_t seed);

inline constexpr int kGlyphClasses = 6;

/// One jittered binary stroke pattern of class `cls` on a side x side canvas.
/// Classes: 0 twin verticals, 1 box, 2 cross, 3 stacked horizontals,
/// 4 ellipse, 5 tilted bar with a floor line.
imaging::BinaryImage glyph(int cls, int side, std::uint64_t seed);

/// `per_class` samples of each of the first `classes` glyph classes, in class order.
std::vector<LabeledImage> glyph_dataset(int classes, std::size_t per_class, int side,
                                        std::uint64_t seed);

}  // namespace scnn::synth
