#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scnn/imaging.hpp"

namespace scnn::api {

using imaging::BinaryImage;
using imaging::GrayImage;
using imaging::RgbImage;

inline constexpr int kApiSide = 256;
inline constexpr double kEnhanceGate = 0.3;
inline constexpr int kDefaultBackgroundStride = 5;

class InsufficientFramesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered frames of one clip, all the same size.
class FrameSequence {
 public:
  FrameSequence() = default;
  explicit FrameSequence(std::vector<RgbImage> frames);

  std::size_t size() const noexcept { return frames_.size(); }
  int width() const noexcept { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const noexcept { return frames_.empty() ? 0 : frames_.front().height(); }
  const RgbImage& operator[](std::size_t i) const { return frames_[i]; }
  const std::vector<RgbImage>& frames() const noexcept { return frames_; }

 private:
  std::vector<RgbImage> frames_;
};

/// Per-pixel count of edge hits over the processed frames.
class EdgeAccumulator {
 public:
  EdgeAccumulator(int width = kApiSide, int height = kApiSide);

  void add(const BinaryImage& edges);
  void merge(const EdgeAccumulator& other);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t frames() const noexcept { return frames_; }
  std::uint32_t count(int x, int y) const {
    return counts_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }

 private:
  int width_;
  int height_;
  std::size_t frames_ = 0;
  std::vector<std::uint32_t> counts_;
};

enum class Normalization { FrameMax, Fixed };
enum class Outline { Binarize, Perimeter };

struct ActionPatternImage {
  BinaryImage pixels{kApiSide, kApiSide, 0};
  std::optional<std::string> label;

  bool operator==(const ActionPatternImage&) const = default;
};

struct ApiOptions {
  bool direction_filter = true;
  Normalization normalization = Normalization::FrameMax;
  Outline outline = Outline::Binarize;
  int background_stride = kDefaultBackgroundStride;
  /// Called once per processed frame with its 0-based index and edge map.
  std::function<void(std::size_t, const BinaryImage&)> on_frame;
};

/// Temporal median over every `sample_stride`-th frame; the stride shrinks
/// when needed so that at least three frames are sampled.
GrayImage background_model(const FrameSequence& seq, int sample_stride = kDefaultBackgroundStride);

/// Absolute difference to the background, normalized, then pixels above the
/// 0.3 gate are stretched linearly onto (0,1]; everything else is zeroed.
GrayImage subtract_and_enhance(const RgbImage& frame, const GrayImage& background,
                               Normalization normalization = Normalization::FrameMax);

BinaryImage outline(const EdgeAccumulator& acc, Outline mode = Outline::Binarize);

ActionPatternImage build_api(const FrameSequence& seq, const ApiOptions& options = {});

}  // namespace scnn::api
