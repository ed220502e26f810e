#include "scnn/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <utility>

namespace scnn::imaging {
namespace {

// Normalized magnitudes closer than this count as equal during non-maximum
// suppression, so symmetric ridges keep both flanks regardless of rounding.
constexpr double kTieTolerance = 1e-9;

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

struct Sample1d {
  int lo;
  int hi;
  double frac;
};

Sample1d bilinear_sample(int out, int in_size, int out_size) {
  const double scale = static_cast<double>(in_size) / out_size;
  double src = (out + 0.5) * scale - 0.5;
  src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
  const int lo = static_cast<int>(std::floor(src));
  const int hi = std::min(lo + 1, in_size - 1);
  return {lo, hi, src - lo};
}

template <int C>
Image<double, C> resize_impl(const Image<double, C>& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) {
    throw std::invalid_argument("resize_bilinear: target dimensions must be positive");
  }
  Image<double, C> out(out_w, out_h);
  std::vector<Sample1d> xs(out_w);
  for (int x = 0; x < out_w; ++x) xs[x] = bilinear_sample(x, img.width(), out_w);
  for (int y = 0; y < out_h; ++y) {
    const Sample1d sy = bilinear_sample(y, img.height(), out_h);
    for (int x = 0; x < out_w; ++x) {
      const Sample1d& sx = xs[x];
      for (int c = 0; c < C; ++c) {
        const double a = img.at(sx.lo, sy.lo, c);
        const double b = img.at(sx.hi, sy.lo, c);
        const double d = img.at(sx.lo, sy.hi, c);
        const double e = img.at(sx.hi, sy.hi, c);
        const double top = a + sx.frac * (b - a);
        const double bottom = d + sx.frac * (e - d);
        out.at(x, y, c) = std::clamp(top + sy.frac * (bottom - top), 0.0, 1.0);
      }
    }
  }
  return out;
}

// Quantized step along the gradient direction (image y grows downwards).
std::pair<int, int> gradient_step(double gx, double gy) {
  double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
  if (angle < 0.0) angle += 180.0;
  if (angle < 22.5 || angle >= 157.5) return {1, 0};
  if (angle < 67.5) return {1, 1};
  if (angle < 112.5) return {0, 1};
  return {-1, 1};
}

}  // namespace

GrayImage rgb_to_gray(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double g = kLumaRed * img.at(x, y, 0) + kLumaGreen * img.at(x, y, 1) +
                       kLumaBlue * img.at(x, y, 2);
      out.at(x, y) = std::clamp(g, 0.0, 1.0);
    }
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  return resize_impl(img, out_w, out_h);
}

RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h) {
  return resize_impl(img, out_w, out_h);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian sigma must be positive");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[i + radius] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const std::vector<double> taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int w = img.width();
  const int h = img.height();

  GrayImage rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[k + radius] * img.at(clamp_index(x + k, w), y);
      }
      rows.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[k + radius] * rows.at(x, clamp_index(y + k, h));
      }
      out.at(x, y) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

BinaryImage canny(const GrayImage& img, const CannyOptions& options, CannyTrace* trace) {
  if (img.width() < kCannyMinSide || img.height() < kCannyMinSide) {
    throw std::invalid_argument("canny: image must be at least 8x8 pixels");
  }
  if (options.histogram_bins < 1 || !(options.non_edge_fraction > 0.0) ||
      !(options.non_edge_fraction <= 1.0) || !(options.low_ratio > 0.0) ||
      !(options.low_ratio <= 1.0)) {
    throw std::invalid_argument("canny: invalid threshold options");
  }
  const int w = img.width();
  const int h = img.height();

  GrayImage blurred = gaussian_blur(img, options.sigma);
  GrayImage gx(w, h);
  GrayImage gy(w, h);
  GrayImage mag(w, h);
  double max_mag = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx =
          0.5 * (blurred.at(clamp_index(x + 1, w), y) - blurred.at(clamp_index(x - 1, w), y));
      const double dy =
          0.5 * (blurred.at(x, clamp_index(y + 1, h)) - blurred.at(x, clamp_index(y - 1, h)));
      gx.at(x, y) = dx;
      gy.at(x, y) = dy;
      const double m = std::hypot(dx, dy);
      mag.at(x, y) = m;
      max_mag = std::max(max_mag, m);
    }
  }

  BinaryImage edges(w, h, 0);
  BinaryImage suppressed(w, h, 0);
  double high = 0.0;
  double low = 0.0;

  if (max_mag > 0.0) {
    for (double& m : mag.pixels()) m /= max_mag;

    std::size_t candidates = 0;
    std::vector<std::size_t> histogram(options.histogram_bins, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double m = mag.at(x, y);
        if (m <= 0.0) continue;
        const auto [sx, sy] = gradient_step(gx.at(x, y), gy.at(x, y));
        const double ahead = mag.at(clamp_index(x + sx, w), clamp_index(y + sy, h));
        const double behind = mag.at(clamp_index(x - sx, w), clamp_index(y - sy, h));
        if (m + kTieTolerance >= ahead && m + kTieTolerance >= behind) {
          suppressed.at(x, y) = 1;
          ++candidates;
          const int bin = std::min(options.histogram_bins - 1,
                                   static_cast<int>(m * options.histogram_bins));
          ++histogram[bin];
        }
      }
    }

    if (candidates > 0) {
      const double target = options.non_edge_fraction * static_cast<double>(candidates);
      std::size_t cumulative = 0;
      int bin = 0;
      for (; bin < options.histogram_bins; ++bin) {
        cumulative += histogram[bin];
        if (static_cast<double>(cumulative) >= target) break;
      }
      bin = std::min(bin, options.histogram_bins - 1);
      high = static_cast<double>(bin + 1) / options.histogram_bins;
      low = options.low_ratio * high;

      std::queue<std::pair<int, int>> frontier;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (suppressed.at(x, y) && mag.at(x, y) >= high) {
            edges.at(x, y) = 1;
            frontier.emplace(x, y);
          }
        }
      }
      while (!frontier.empty()) {
        const auto [x, y] = frontier.front();
        frontier.pop();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (edges.at(nx, ny) || !suppressed.at(nx, ny)) continue;
            if (mag.at(nx, ny) >= low) {
              edges.at(nx, ny) = 1;
              frontier.emplace(nx, ny);
            }
          }
        }
      }
    }

    if (options.vertical_only) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (edges.at(x, y) && std::abs(gy.at(x, y)) > std::abs(gx.at(x, y))) {
            edges.at(x, y) = 0;
          }
        }
      }
    }
  }

  if (trace != nullptr) {
    trace->blurred = std::move(blurred);
    trace->grad_x = std::move(gx);
    trace->grad_y = std::move(gy);
    trace->magnitude = std::move(mag);
    trace->suppressed = std::move(suppressed);
    trace->high_threshold = high;
    trace->low_threshold = low;
  }
  return edges;
}

BinaryImage canny_vertical(const GrayImage& img) { return canny(img, CannyOptions{}); }

}  // namespace scnn::imaging
