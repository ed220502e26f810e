#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scnn::oracle {

nn::Tensor<double> random_tensor(const nn::Shape& shape, std::mt19937_64& rng, double lo,
                                 double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Tensor<double> t(shape);
  for (double& v : t.values()) v = u(rng);
  return t;
}

nn::Tensor<double> naive_conv2d(const nn::Tensor<double>& x, const nn::Tensor<double>& w,
                                const nn::Tensor<double>& b, std::size_t stride,
                                std::size_t padding) {
  const std::size_t n = x.dim(0), h = x.dim(1), wd = x.dim(2), ci = x.dim(3);
  const std::size_t kh = w.dim(0), kw = w.dim(1), co = w.dim(3);
  const std::size_t oh = (h + 2 * padding - kh) / stride + 1;
  const std::size_t ow = (wd + 2 * padding - kw) / stride + 1;
  nn::Tensor<double> y({n, oh, ow, co});
  for (std::size_t in = 0; in < n; ++in)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox)
        for (std::size_t oc = 0; oc < co; ++oc) {
          double acc = b[oc];
          for (std::size_t ky = 0; ky < kh; ++ky)
            for (std::size_t kx = 0; kx < kw; ++kx)
              for (std::size_t c = 0; c < ci; ++c) {
                const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(padding);
                const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(padding);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
                acc += x.at(in, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), c) *
                       w[((ky * kw + kx) * ci + c) * co + oc];
              }
          y.at(in, oy, ox, oc) = acc;
        }
  return y;
}

imaging::GrayImage naive_blur(const imaging::GrayImage& img, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k2((2 * r + 1) * (2 * r + 1));
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k2[(dy + r) * (2 * r + 1) + (dx + r)] = v;
      sum += v;
    }
  imaging::GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = std::clamp(x + dx, 0, img.width() - 1);
          const int sy = std::clamp(y + dy, 0, img.height() - 1);
          acc += k2[(dy + r) * (2 * r + 1) + (dx + r)] * img.at(sx, sy);
        }
      out.at(x, y) = acc / sum;
    }
  return out;
}

double bilinear_at(const imaging::GrayImage& img, int out_w, int out_h, int ox, int oy) {
  const double sx = (ox + 0.5) * img.width() / out_w - 0.5;
  const double sy = (oy + 0.5) * img.height() / out_h - 0.5;
  auto sample = [&](int x, int y) {
    return img.at(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1));
  };
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double fx = sx - x0;
  const double fy = sy - y0;
  return (1 - fx) * (1 - fy) * sample(x0, y0) + fx * (1 - fy) * sample(x0 + 1, y0) +
         (1 - fx) * fy * sample(x0, y0 + 1) + fx * fy * sample(x0 + 1, y0 + 1);
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

GradCheck compare_gradients(const std::vector<double>& analytic, const std::vector<double>& numeric,
                            const std::vector<bool>& mask, double floor) {
  if (analytic.size() != numeric.size()) throw std::invalid_argument("gradient sizes differ");
  GradCheck out;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double a = analytic[i], n = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(a - n) / denom);
    ++out.compared;
  }
  return out;
}

OneVsRest one_vs_rest(const std::vector<std::vector<std::size_t>>& counts, std::size_t positive) {
  OneVsRest r;
  for (std::size_t p = 0; p < counts.size(); ++p)
    for (std::size_t t = 0; t < counts[p].size(); ++t) {
      const std::size_t c = counts[p][t];
      if (p == positive && t == positive) r.tp += c;
      else if (p == positive) r.fp += c;
      else if (t == positive) r.fn += c;
      else r.tn += c;
    }
  return r;
}

imaging::BinaryImage per_frame_or_api(const synth::VideoOptions& opts, bool direction_filter) {
  imaging::BinaryImage api(opts.width, opts.height, 0);
  imaging::CannyOptions canny;
  canny.vertical_only = direction_filter;
  for (std::size_t i = 0; i < opts.frames; i += 2) {
    imaging::GrayImage mask(opts.width, opts.height, 0.0);
    const synth::Box b = synth::foreground_box(opts, i);
    for (int y = 0; y < opts.height; ++y)
      for (int x = 0; x < opts.width; ++x)
        if (b.contains(x, y)) mask.at(x, y) = 1.0;
    const imaging::BinaryImage edges = imaging::canny(mask, canny);
    for (std::size_t p = 0; p < api.size(); ++p) api.pixels()[p] |= edges.pixels()[p];
  }
  return api;
}

imaging::GrayImage median_background(const std::vector<imaging::GrayImage>& samples) {
  imaging::GrayImage out(samples.front().width(), samples.front().height());
  std::vector<double> stack(samples.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    for (std::size_t s = 0; s < samples.size(); ++s) stack[s] = samples[s].pixels()[p];
    std::sort(stack.begin(), stack.end());
    const std::size_t m = stack.size() / 2;
    out.pixels()[p] = stack.size() % 2 ? stack[m] : (stack[m - 1] + stack[m]) / 2.0;
  }
  return out;
}

}  // namespace scnn::oracle
