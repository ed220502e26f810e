#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace scnn::imaging {

/// Dense interleaved raster, row-major, `Channels` samples per pixel.
template <typename T, int Channels = 1>
class Image {
 public:
  static constexpr int channels = Channels;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("image dimensions must be positive");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t size() const noexcept { return pixels_.size(); }

  T& at(int x, int y, int c = 0) { return pixels_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return pixels_[index(x, y, c)]; }

  std::vector<T>& pixels() & noexcept { return pixels_; }
  const std::vector<T>& pixels() const& noexcept { return pixels_; }
  // by value so `for (v : make_image().pixels())` does not dangle
  std::vector<T> pixels() && noexcept { return std::move(pixels_); }

  bool same_size(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  template <typename U, int C>
  bool same_size(const Image<U, C>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> pixels_;
};

using RgbImage = Image<double, 3>;
using GrayImage = Image<double>;
using BinaryImage = Image<std::uint8_t>;

inline constexpr double kLumaRed = 0.2989;
inline constexpr double kLumaGreen = 0.5870;
inline constexpr double kLumaBlue = 0.1141;

GrayImage rgb_to_gray(const RgbImage& img);

/// Half-pixel-centred bilinear resampling. Throws on a non-positive target.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);
RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h);

/// Separable Gaussian, radius ceil(3 sigma), replicated borders.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Normalized 1-D Gaussian taps of length 2*ceil(3 sigma)+1.
std::vector<double> gaussian_kernel(double sigma);

struct CannyOptions {
  double sigma = 1.4142135623730951;
  /// Fraction of non-maximum-suppressed candidates that fall below the
  /// high hysteresis threshold.
  double non_edge_fraction = 0.7;
  double low_ratio = 0.4;
  int histogram_bins = 64;
  /// Keep only pixels whose gradient lies within 45 degrees of horizontal.
  bool vertical_only = true;
};

/// Intermediate products of a Canny run, exposed for inspection and tests.
struct CannyTrace {
  GrayImage blurred;
  GrayImage grad_x;
  GrayImage grad_y;
  GrayImage magnitude;  // normalized to [0,1] by its maximum
  BinaryImage suppressed;
  double high_threshold = 0.0;
  double low_threshold = 0.0;
};

BinaryImage canny(const GrayImage& img, const CannyOptions& options = {},
                  CannyTrace* trace = nullptr);

/// Canny followed by the vertical-edge direction filter.
BinaryImage canny_vertical(const GrayImage& img);

inline constexpr int kCannyMinSide = 8;

}  // namespace scnn::imaging
