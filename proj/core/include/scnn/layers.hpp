#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "scnn/tensor.hpp"

namespace scnn::nn {

enum class Mode { Train, Infer };

class InvalidStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// (in + 2 padding - kernel) / stride + 1. Rejects windows that do not tile
/// the padded input exactly.
std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding);

/// Cross-correlation of an NHWC input with weights laid out
/// (kernel_h, kernel_w, in_channels, out_channels).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias,
                         ConvGeometry geometry);

template <typename T>
struct ConvGradients {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
ConvGradients<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weights,
                                 const Tensor<T>& grad_out, ConvGeometry geometry);

struct PoolGeometry {
  std::size_t kernel = 2;
  std::size_t stride = 2;
  std::size_t padding = 0;
};

std::size_t pool_output_size(std::size_t in, const PoolGeometry& geometry);

template <typename T>
struct PoolResult {
  Tensor<T> output;
  /// Flat input offset of the winning element for every output element.
  std::vector<std::size_t> argmax;
  Shape input_shape;
};

/// Padded cells never win; ties go to the first cell in row-major window order.
template <typename T>
PoolResult<T> maxpool_forward(const Tensor<T>& x, PoolGeometry geometry);

template <typename T>
Tensor<T> maxpool_backward(std::span<const std::size_t> argmax, const Shape& input_shape,
                           const Tensor<T>& grad_out);

struct BatchNormConfig {
  double eps = 1e-5;
  /// Weight kept on the previous running statistic at each update.
  double momentum = 0.9;
};

template <typename T>
struct BatchNormCache {
  Tensor<T> normalized;
  std::vector<double> inv_std;
};

/// Per-channel normalization over batch and spatial positions. In train mode
/// the running statistics are updated in place; infer mode only reads them.
template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                            Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode,
                            BatchNormCache<T>* cache = nullptr, BatchNormConfig config = {});

template <typename T>
struct BatchNormGradients {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

template <typename T>
BatchNormGradients<T> batchnorm_backward(const BatchNormCache<T>& cache, const Tensor<T>& gamma,
                                         const Tensor<T>& grad_out);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out);

/// y = flatten(x) W + b with W laid out (in_units, out_units).
template <typename T>
Tensor<T> fc_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias);

template <typename T>
struct FcGradients {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
FcGradients<T> fc_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& grad_out);

template <typename T>
struct SoftmaxXentResult {
  double loss = 0.0;
  Tensor<T> probabilities;
  Tensor<T> grad_logits;
};

/// Mean cross-entropy of row-wise softmax against class indices.
template <typename T>
SoftmaxXentResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> targets);

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace scnn::nn
