#include "scnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gemm.hpp"

namespace scnn::nn {
namespace {

// Upper bound on im2col scratch (elements); batches are processed in chunks.
constexpr std::size_t kColumnBudget = std::size_t{1} << 23;

struct ConvDims {
  std::size_t n, h, w, cin, kh, kw, cout, ho, wo;
  std::size_t patch() const { return kh * kw * cin; }
  std::size_t rows_per_sample() const { return ho * wo; }
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& x, const Tensor<T>& weights, ConvGeometry g) {
  if (x.rank() != 4) throw ShapeError("conv2d: input must be rank 4, got " + to_string(x.shape()));
  if (weights.rank() != 4) {
    throw ShapeError("conv2d: weights must be (kh,kw,cin,cout), got " + to_string(weights.shape()));
  }
  if (weights.dim(2) != x.channels()) {
    throw ShapeError("conv2d: weight input channels " + std::to_string(weights.dim(2)) +
                     " do not match input channels " + std::to_string(x.channels()));
  }
  ConvDims d{x.batch(), x.height(), x.width(), x.channels(), weights.dim(0), weights.dim(1),
             weights.dim(3), 0, 0};
  d.ho = conv_output_size(d.h, d.kh, g.stride, g.padding);
  d.wo = conv_output_size(d.w, d.kw, g.stride, g.padding);
  return d;
}

std::size_t chunk_samples(const ConvDims& d) {
  const std::size_t per_sample = d.rows_per_sample() * d.patch();
  return std::max<std::size_t>(1, kColumnBudget / std::max<std::size_t>(1, per_sample));
}

template <typename T>
void im2col(const Tensor<T>& x, const ConvDims& d, ConvGeometry g, std::size_t n0, std::size_t count,
            std::vector<T>& cols) {
  const std::size_t patch = d.patch();
  cols.assign(count * d.rows_per_sample() * patch, T{0});
  const long pad = static_cast<long>(g.padding);
  for (std::size_t ln = 0; ln < count; ++ln) {
    const std::size_t n = n0 + ln;
    for (std::size_t oy = 0; oy < d.ho; ++oy) {
      for (std::size_t ox = 0; ox < d.wo; ++ox) {
        T* dst = cols.data() + ((ln * d.ho + oy) * d.wo + ox) * patch;
        for (std::size_t ky = 0; ky < d.kh; ++ky) {
          const long iy = static_cast<long>(oy * g.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(d.h)) continue;
          for (std::size_t kx = 0; kx < d.kw; ++kx) {
            const long ix = static_cast<long>(ox * g.stride + kx) - pad;
            if (ix < 0 || ix >= static_cast<long>(d.w)) continue;
            const T* src = &x.at(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), 0);
            std::copy(src, src + d.cin, dst + (ky * d.kw + kx) * d.cin);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const std::vector<T>& cols, const ConvDims& d, ConvGeometry g, std::size_t n0,
            std::size_t count, Tensor<T>& grad_x) {
  const std::size_t patch = d.patch();
  const long pad = static_cast<long>(g.padding);
  for (std::size_t ln = 0; ln < count; ++ln) {
    const std::size_t n = n0 + ln;
    for (std::size_t oy = 0; oy < d.ho; ++oy) {
      for (std::size_t ox = 0; ox < d.wo; ++ox) {
        const T* src = cols.data() + ((ln * d.ho + oy) * d.wo + ox) * patch;
        for (std::size_t ky = 0; ky < d.kh; ++ky) {
          const long iy = static_cast<long>(oy * g.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(d.h)) continue;
          for (std::size_t kx = 0; kx < d.kw; ++kx) {
            const long ix = static_cast<long>(ox * g.stride + kx) - pad;
            if (ix < 0 || ix >= static_cast<long>(d.w)) continue;
            T* dst = &grad_x.at(n, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), 0);
            const T* s = src + (ky * d.kw + kx) * d.cin;
            for (std::size_t c = 0; c < d.cin; ++c) dst[c] += s[c];
          }
        }
      }
    }
  }
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

int as_int(std::size_t v) {
  if (v > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw ShapeError("dimension too large for BLAS");
  }
  return static_cast<int>(v);
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding) {
  if (kernel == 0 || stride == 0) throw ShapeError("kernel and stride must be >= 1");
  const std::size_t padded = in + 2 * padding;
  if (padded < kernel) throw ShapeError("kernel larger than padded input");
  if ((padded - kernel) % stride != 0) {
    throw ShapeError("stride " + std::to_string(stride) + " does not tile padded extent " +
                     std::to_string(padded) + " with kernel " + std::to_string(kernel));
  }
  return (padded - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias,
                         ConvGeometry geometry) {
  const ConvDims d = conv_dims(x, weights, geometry);
  if (bias.size() != d.cout) throw ShapeError("conv2d: bias length must equal output channels");

  Tensor<T> out({d.n, d.ho, d.wo, d.cout});
  const std::size_t patch = d.patch();
  const std::size_t chunk = chunk_samples(d);
  std::vector<T> cols;
  for (std::size_t n0 = 0; n0 < d.n; n0 += chunk) {
    const std::size_t count = std::min(chunk, d.n - n0);
    const std::size_t rows = count * d.rows_per_sample();
    T* y = out.data() + n0 * d.rows_per_sample() * d.cout;
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(bias.data(), bias.data() + d.cout, y + r * d.cout);
    }
    im2col(x, d, geometry, n0, count, cols);
    detail::gemm(false, false, as_int(rows), as_int(d.cout), as_int(patch), T{1}, cols.data(),
                 as_int(patch), weights.data(), as_int(d.cout), T{1}, y, as_int(d.cout));
  }
  return out;
}

template <typename T>
ConvGradients<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weights,
                                 const Tensor<T>& grad_out, ConvGeometry geometry) {
  const ConvDims d = conv_dims(x, weights, geometry);
  const Shape expected{d.n, d.ho, d.wo, d.cout};
  if (grad_out.shape() != expected) {
    throw ShapeError("conv2d_backward: grad_out shape " + to_string(grad_out.shape()) +
                     " expected " + to_string(expected));
  }
  ConvGradients<T> g{Tensor<T>(x.shape()), Tensor<T>(weights.shape()), Tensor<T>({d.cout})};

  std::vector<double> bias_acc(d.cout, 0.0);
  const std::size_t total_rows = d.n * d.rows_per_sample();
  for (std::size_t r = 0; r < total_rows; ++r) {
    const T* row = grad_out.data() + r * d.cout;
    for (std::size_t c = 0; c < d.cout; ++c) bias_acc[c] += row[c];
  }
  for (std::size_t c = 0; c < d.cout; ++c) g.bias[c] = static_cast<T>(bias_acc[c]);

  const std::size_t patch = d.patch();
  const std::size_t chunk = chunk_samples(d);
  std::vector<T> cols;
  std::vector<T> grad_cols;
  for (std::size_t n0 = 0; n0 < d.n; n0 += chunk) {
    const std::size_t count = std::min(chunk, d.n - n0);
    const std::size_t rows = count * d.rows_per_sample();
    const T* gy = grad_out.data() + n0 * d.rows_per_sample() * d.cout;
    im2col(x, d, geometry, n0, count, cols);
    detail::gemm(true, false, as_int(patch), as_int(d.cout), as_int(rows), T{1}, cols.data(),
                 as_int(patch), gy, as_int(d.cout), T{1}, g.weights.data(), as_int(d.cout));
    grad_cols.assign(rows * patch, T{0});
    detail::gemm(false, true, as_int(rows), as_int(patch), as_int(d.cout), T{1}, gy,
                 as_int(d.cout), weights.data(), as_int(d.cout), T{0}, grad_cols.data(),
                 as_int(patch));
    col2im(grad_cols, d, geometry, n0, count, g.input);
  }
  return g;
}

std::size_t pool_output_size(std::size_t in, const PoolGeometry& g) {
  if (g.kernel == 0 || g.stride == 0) throw ShapeError("pool kernel and stride must be >= 1");
  if (g.padding >= g.kernel) throw ShapeError("pool padding must be smaller than the kernel");
  const std::size_t padded = in + 2 * g.padding;
  if (padded < g.kernel) throw ShapeError("pool kernel larger than padded input");
  return (padded - g.kernel) / g.stride + 1;
}

template <typename T>
PoolResult<T> maxpool_forward(const Tensor<T>& x, PoolGeometry g) {
  if (x.rank() != 4) throw ShapeError("maxpool: input must be rank 4");
  const std::size_t n = x.batch(), h = x.height(), w = x.width(), c = x.channels();
  const std::size_t ho = pool_output_size(h, g);
  const std::size_t wo = pool_output_size(w, g);
  PoolResult<T> r{Tensor<T>({n, ho, wo, c}), std::vector<std::size_t>(n * ho * wo * c), x.shape()};
  const long pad = static_cast<long>(g.padding);
  std::size_t o = 0;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        for (std::size_t ch = 0; ch < c; ++ch, ++o) {
          T best = -std::numeric_limits<T>::infinity();
          std::size_t best_at = std::numeric_limits<std::size_t>::max();
          for (std::size_t ky = 0; ky < g.kernel; ++ky) {
            const long iy = static_cast<long>(oy * g.stride + ky) - pad;
            if (iy < 0 || iy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < g.kernel; ++kx) {
              const long ix = static_cast<long>(ox * g.stride + kx) - pad;
              if (ix < 0 || ix >= static_cast<long>(w)) continue;
              const std::size_t at = ((b * h + iy) * w + ix) * c + ch;
              if (best_at == std::numeric_limits<std::size_t>::max() || x[at] > best) {
                best = x[at];
                best_at = at;
              }
            }
          }
          if (best_at == std::numeric_limits<std::size_t>::max()) {
            throw ShapeError("maxpool: window lies entirely in padding");
          }
          r.output[o] = best;
          r.argmax[o] = best_at;
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool_backward(std::span<const std::size_t> argmax, const Shape& input_shape,
                           const Tensor<T>& grad_out) {
  if (argmax.size() != grad_out.size()) {
    throw ShapeError("maxpool_backward: index map and gradient sizes differ");
  }
  Tensor<T> gx(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= gx.size()) throw ShapeError("maxpool_backward: index out of range");
    gx[argmax[i]] += grad_out[i];
  }
  return gx;
}

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                            Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode,
                            BatchNormCache<T>* cache, BatchNormConfig config) {
  if (x.rank() != 4) throw ShapeError("batchnorm: input must be rank 4");
  const std::size_t c = x.channels();
  if (gamma.size() != c || beta.size() != c || running_mean.size() != c ||
      running_var.size() != c) {
    throw ShapeError("batchnorm: parameter length must equal channel count");
  }
  const std::size_t positions = x.size() / c;
  std::vector<double> mean(c, 0.0);
  std::vector<double> var(c, 0.0);

  if (mode == Mode::Train) {
    if (x.batch() < 2) throw InvalidStateError("batchnorm: train mode needs a batch of at least 2");
    for (std::size_t p = 0; p < positions; ++p) {
      const T* row = x.data() + p * c;
      for (std::size_t ch = 0; ch < c; ++ch) mean[ch] += row[ch];
    }
    for (double& m : mean) m /= static_cast<double>(positions);
    for (std::size_t p = 0; p < positions; ++p) {
      const T* row = x.data() + p * c;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double dv = row[ch] - mean[ch];
        var[ch] += dv * dv;
      }
    }
    for (double& v : var) v /= static_cast<double>(positions);
    for (std::size_t ch = 0; ch < c; ++ch) {
      running_mean[ch] = static_cast<T>(config.momentum * running_mean[ch] +
                                        (1.0 - config.momentum) * mean[ch]);
      running_var[ch] = static_cast<T>(config.momentum * running_var[ch] +
                                       (1.0 - config.momentum) * var[ch]);
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = running_mean[ch];
      var[ch] = std::max(0.0, static_cast<double>(running_var[ch]));
    }
  }

  std::vector<double> inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(var[ch] + config.eps);

  Tensor<T> y(x.shape());
  Tensor<T> normalized;
  if (cache != nullptr) normalized = Tensor<T>(x.shape());
  for (std::size_t p = 0; p < positions; ++p) {
    const T* row = x.data() + p * c;
    T* out = y.data() + p * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double xhat = (row[ch] - mean[ch]) * inv_std[ch];
      if (cache != nullptr) normalized[p * c + ch] = static_cast<T>(xhat);
      out[ch] = static_cast<T>(gamma[ch] * xhat + beta[ch]);
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename T>
BatchNormGradients<T> batchnorm_backward(const BatchNormCache<T>& cache, const Tensor<T>& gamma,
                                         const Tensor<T>& grad_out) {
  require_same_shape(cache.normalized, grad_out, "batchnorm_backward");
  const std::size_t c = gamma.size();
  if (cache.inv_std.size() != c || grad_out.channels() != c) {
    throw ShapeError("batchnorm_backward: channel mismatch");
  }
  const std::size_t positions = grad_out.size() / c;
  std::vector<double> sum_dy(c, 0.0);
  std::vector<double> sum_dy_xhat(c, 0.0);
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double dy = grad_out[p * c + ch];
      sum_dy[ch] += dy;
      sum_dy_xhat[ch] += dy * cache.normalized[p * c + ch];
    }
  }
  BatchNormGradients<T> g{Tensor<T>(grad_out.shape()), Tensor<T>({c}), Tensor<T>({c})};
  const double m = static_cast<double>(positions);
  for (std::size_t ch = 0; ch < c; ++ch) {
    g.gamma[ch] = static_cast<T>(sum_dy_xhat[ch]);
    g.beta[ch] = static_cast<T>(sum_dy[ch]);
  }
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double dy = grad_out[p * c + ch];
      const double xhat = cache.normalized[p * c + ch];
      const double dx = gamma[ch] * cache.inv_std[ch] *
                        (dy - sum_dy[ch] / m - xhat * sum_dy_xhat[ch] / m);
      g.input[p * c + ch] = static_cast<T>(dx);
    }
  }
  return g;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (T& v : y.values()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  require_same_shape(x, grad_out, "relu_backward");
  Tensor<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T{0} ? grad_out[i] : T{0};
  return g;
}

template <typename T>
Tensor<T> fc_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  if (x.rank() < 1 || weights.rank() != 2) throw ShapeError("fc: weights must be (in,out)");
  const std::size_t n = x.dim(0);
  const std::size_t in = x.size() / n;
  if (weights.dim(0) != in) {
    throw ShapeError("fc: input has " + std::to_string(in) + " units, weights expect " +
                     std::to_string(weights.dim(0)));
  }
  const std::size_t out_units = weights.dim(1);
  if (bias.size() != out_units) throw ShapeError("fc: bias length must equal output units");
  Tensor<T> y({n, out_units});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(bias.data(), bias.data() + out_units, y.data() + r * out_units);
  }
  detail::gemm(false, false, as_int(n), as_int(out_units), as_int(in), T{1}, x.data(), as_int(in),
               weights.data(), as_int(out_units), T{1}, y.data(), as_int(out_units));
  return y;
}

template <typename T>
FcGradients<T> fc_backward(const Tensor<T>& x, const Tensor<T>& weights,
                           const Tensor<T>& grad_out) {
  const std::size_t n = x.dim(0);
  const std::size_t in = x.size() / n;
  if (weights.rank() != 2 || weights.dim(0) != in) throw ShapeError("fc_backward: weight shape");
  const std::size_t out_units = weights.dim(1);
  if (grad_out.shape() != Shape{n, out_units}) throw ShapeError("fc_backward: grad_out shape");

  FcGradients<T> g{Tensor<T>(x.shape()), Tensor<T>(weights.shape()), Tensor<T>({out_units})};
  detail::gemm(true, false, as_int(in), as_int(out_units), as_int(n), T{1}, x.data(), as_int(in),
               grad_out.data(), as_int(out_units), T{0}, g.weights.data(), as_int(out_units));
  detail::gemm(false, true, as_int(n), as_int(in), as_int(out_units), T{1}, grad_out.data(),
               as_int(out_units), weights.data(), as_int(out_units), T{0}, g.input.data(),
               as_int(in));
  std::vector<double> acc(out_units, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < out_units; ++j) acc[j] += grad_out[r * out_units + j];
  }
  for (std::size_t j = 0; j < out_units; ++j) g.bias[j] = static_cast<T>(acc[j]);
  return g;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() < 1) throw ShapeError("softmax: empty logits");
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.size() / n;
  Tensor<T> p({n, k});
  std::vector<double> e(k);
  for (std::size_t r = 0; r < n; ++r) {
    const T* z = logits.data() + r * k;
    const double zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      e[j] = std::exp(static_cast<double>(z[j]) - zmax);
      sum += e[j];
    }
    for (std::size_t j = 0; j < k; ++j) p[r * k + j] = static_cast<T>(e[j] / sum);
  }
  return p;
}

template <typename T>
SoftmaxXentResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> targets) {
  if (logits.rank() < 1) throw ShapeError("softmax_xent: empty logits");
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.size() / n;
  if (targets.size() != n) throw std::invalid_argument("softmax_xent: one target per row required");
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      throw std::invalid_argument("softmax_xent: target index " + std::to_string(t) +
                                  " outside [0," + std::to_string(k) + ")");
    }
  }
  SoftmaxXentResult<T> r{0.0, Tensor<T>({n, k}), Tensor<T>({n, k})};
  std::vector<double> e(k);
  double total = 0.0;
  for (std::size_t row = 0; row < n; ++row) {
    const T* z = logits.data() + row * k;
    const double zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      e[j] = std::exp(static_cast<double>(z[j]) - zmax);
      sum += e[j];
    }
    const double lse = zmax + std::log(sum);
    const auto t = static_cast<std::size_t>(targets[row]);
    total += lse - static_cast<double>(z[t]);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = e[j] / sum;
      r.probabilities[row * k + j] = static_cast<T>(p);
      r.grad_logits[row * k + j] =
          static_cast<T>((p - (j == t ? 1.0 : 0.0)) / static_cast<double>(n));
    }
  }
  r.loss = total / static_cast<double>(n);
  return r;
}

#define SCNN_INSTANTIATE_LAYERS(T)                                                              \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,       \
                                    ConvGeometry);                                              \
  template ConvGradients<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&,                 \
                                            const Tensor<T>&, ConvGeometry);                    \
  template PoolResult<T> maxpool_forward(const Tensor<T>&, PoolGeometry);                       \
  template Tensor<T> maxpool_backward(std::span<const std::size_t>, const Shape&,               \
                                      const Tensor<T>&);                                        \
  template Tensor<T> batchnorm_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                       Tensor<T>&, Tensor<T>&, Mode, BatchNormCache<T>*,        \
                                       BatchNormConfig);                                        \
  template BatchNormGradients<T> batchnorm_backward(const BatchNormCache<T>&, const Tensor<T>&, \
                                                    const Tensor<T>&);                          \
  template Tensor<T> relu_forward(const Tensor<T>&);                                            \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> fc_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template FcGradients<T> fc_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> softmax(const Tensor<T>&);                                                 \
  template SoftmaxXentResult<T> softmax_xent(const Tensor<T>&, std::span<const int>);

SCNN_INSTANTIATE_LAYERS(float)
SCNN_INSTANTIATE_LAYERS(double)

#undef SCNN_INSTANTIATE_LAYERS

}  // namespace scnn::nn
