#include "scnn/api_builder.hpp"

#include <algorithm>
#include <cmath>

namespace scnn::api {

FrameSequence::FrameSequence(std::vector<RgbImage> frames) : frames_(std::move(frames)) {
  for (const RgbImage& f : frames_) {
    if (f.empty()) throw std::invalid_argument("frame sequence contains an empty frame");
    if (!f.same_size(frames_.front())) {
      throw std::invalid_argument("frame sequence has inconsistent frame dimensions");
    }
  }
}

EdgeAccumulator::EdgeAccumulator(int width, int height)
    : width_(width), height_(height), counts_(static_cast<std::size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("accumulator dimensions must be positive");
}

void EdgeAccumulator::add(const BinaryImage& edges) {
  if (edges.width() != width_ || edges.height() != height_) {
    throw std::invalid_argument("edge map does not match accumulator size");
  }
  const auto& px = edges.pixels();
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += px[i] ? 1u : 0u;
  ++frames_;
}

void EdgeAccumulator::merge(const EdgeAccumulator& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw std::invalid_argument("accumulator size mismatch");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  frames_ += other.frames_;
}

GrayImage background_model(const FrameSequence& seq, int sample_stride) {
  if (sample_stride < 1) throw std::invalid_argument("background sample stride must be >= 1");
  const std::size_t n = seq.size();
  if (n < 3) throw InsufficientFramesError("background model needs at least 3 frames");
  const std::size_t max_stride = (n - 1) / 2;
  const std::size_t stride = std::clamp<std::size_t>(sample_stride, 1, max_stride);

  std::vector<GrayImage> samples;
  for (std::size_t i = 0; i < n; i += stride) samples.push_back(imaging::rgb_to_gray(seq[i]));

  GrayImage bg(seq.width(), seq.height());
  std::vector<double> stack(samples.size());
  const std::size_t mid = stack.size() / 2;
  for (std::size_t p = 0; p < bg.size(); ++p) {
    for (std::size_t s = 0; s < samples.size(); ++s) stack[s] = samples[s].pixels()[p];
    std::nth_element(stack.begin(), stack.begin() + mid, stack.end());
    double median = stack[mid];
    if (stack.size() % 2 == 0) {
      const double lower = *std::max_element(stack.begin(), stack.begin() + mid);
      median = (lower + median) / 2.0;
    }
    bg.pixels()[p] = median;
  }
  return bg;
}

GrayImage subtract_and_enhance(const RgbImage& frame, const GrayImage& background,
                               Normalization normalization) {
  if (!frame.same_size(background)) {
    throw std::invalid_argument("subtract_and_enhance: frame and background sizes differ");
  }
  GrayImage diff = imaging::rgb_to_gray(frame);
  double peak = 0.0;
  for (std::size_t p = 0; p < diff.size(); ++p) {
    double& d = diff.pixels()[p];
    d = std::abs(d - background.pixels()[p]);
    peak = std::max(peak, d);
  }
  if (peak == 0.0) return GrayImage(frame.width(), frame.height(), 0.0);

  const double divisor = normalization == Normalization::FrameMax ? peak : 1.0;
  for (double& d : diff.pixels()) {
    const double norm = std::min(d / divisor, 1.0);
    d = norm > kEnhanceGate ? (norm - kEnhanceGate) / (1.0 - kEnhanceGate) : 0.0;
  }
  return diff;
}

BinaryImage outline(const EdgeAccumulator& acc, Outline mode) {
  const int w = acc.width();
  const int h = acc.height();
  BinaryImage mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) mask.at(x, y) = acc.count(x, y) >= 1 ? 1 : 0;
  }
  if (mode == Outline::Binarize) return mask;

  // Perimeter: set pixels with at least one unset 4-neighbour (outside counts as unset).
  BinaryImage rim(w, h, 0);
  auto unset = [&](int x, int y) {
    return x < 0 || y < 0 || x >= w || y >= h || mask.at(x, y) == 0;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) &&
          (unset(x - 1, y) || unset(x + 1, y) || unset(x, y - 1) || unset(x, y + 1))) {
        rim.at(x, y) = 1;
      }
    }
  }
  return rim;
}

ActionPatternImage build_api(const FrameSequence& seq, const ApiOptions& options) {
  if (seq.size() < 3) throw InsufficientFramesError("build_api needs at least 3 frames");

  std::vector<RgbImage> resized;
  resized.reserve(seq.size());
  for (const RgbImage& f : seq.frames()) {
    resized.push_back(imaging::resize_bilinear(f, kApiSide, kApiSide));
  }
  const FrameSequence work(std::move(resized));
  const GrayImage background = background_model(work, options.background_stride);

  imaging::CannyOptions canny_options;
  canny_options.vertical_only = options.direction_filter;

  EdgeAccumulator acc(kApiSide, kApiSide);
  for (std::size_t i = 0; i < work.size(); i += 2) {
    const GrayImage fg = subtract_and_enhance(work[i], background, options.normalization);
    const BinaryImage edges = imaging::canny(fg, canny_options);
    if (options.on_frame) options.on_frame(i, edges);
    acc.add(edges);
  }

  ActionPatternImage result;
  result.pixels = outline(acc, options.outline);
  return result;
}

}  // namespace scnn::api
