#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/layers.hpp"
#include "scnn/tensor.hpp"

namespace scnn::nn {

enum class LayerKind : std::uint8_t {
  Conv = 1,
  BatchNorm = 2,
  Relu = 3,
  MaxPool = 4,
  FullyConnected = 5,
  SoftmaxXent = 6,
};

std::string_view kind_name(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  std::string name;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  /// Output channels (conv), output units (fc) or classes (softmax-xent).
  std::size_t units = 0;

  static LayerSpec conv(std::string name, std::size_t out_channels, std::size_t kernel = 3,
                        std::size_t stride = 1, std::size_t padding = 1);
  static LayerSpec batchnorm(std::string name);
  static LayerSpec relu(std::string name);
  static LayerSpec maxpool(std::string name, std::size_t kernel = 2, std::size_t stride = 2,
                           std::size_t padding = 0);
  static LayerSpec fully_connected(std::string name, std::size_t units);
  static LayerSpec softmax_xent(std::string name, std::size_t classes);

  bool operator==(const LayerSpec&) const = default;
};

struct FeatureShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t count() const noexcept { return height * width * channels; }
  bool operator==(const FeatureShape&) const = default;
};

std::string to_string(const FeatureShape& s);

/// Ordered, strictly sequential layer list ending in a softmax-xent head.
struct NetworkSpec {
  FeatureShape input;
  std::size_t num_classes = 0;
  std::vector<LayerSpec> layers;

  /// Output shape of every layer; throws ShapeError on any inconsistency.
  std::vector<FeatureShape> output_shapes() const;
  void validate() const { (void)output_shapes(); }

  /// Index of the layer with the given name; throws std::out_of_range.
  std::size_t index_of(std::string_view name) const;
  FeatureShape input_of(std::size_t layer) const;

  bool operator==(const NetworkSpec&) const = default;
};

enum class ParamRole : std::uint8_t {
  Weights = 1,
  Bias = 2,
  Gamma = 3,
  Beta = 4,
  RunningMean = 5,
  RunningVar = 6,
};

constexpr bool is_learnable(ParamRole r) {
  return r != ParamRole::RunningMean && r != ParamRole::RunningVar;
}
/// L2 regularization applies to convolution and fully-connected weights only.
constexpr bool is_decayed(ParamRole r) { return r == ParamRole::Weights; }

template <typename T>
struct Parameter {
  ParamRole role = ParamRole::Weights;
  Tensor<T> value;
  /// SGDM state; empty means all zeros.
  Tensor<T> velocity;
};

template <typename T>
struct ParamStore {
  std::vector<std::vector<Parameter<T>>> layers;

  std::size_t learnable_count() const;
  void reset_velocities();

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    out.layers.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      for (const Parameter<T>& p : layers[i]) {
        out.layers[i].push_back({p.role, p.value.template cast<U>(),
                                 p.velocity.empty() ? Tensor<U>() : p.velocity.template cast<U>()});
      }
    }
    return out;
  }
};

/// Mirrors a ParamStore; running-statistic slots stay empty.
template <typename T>
struct GradStore {
  std::vector<std::vector<Tensor<T>>> layers;
};

/// Parameter shapes and roles for one layer, without values.
std::vector<std::pair<ParamRole, Shape>> parameter_layout(const NetworkSpec& spec,
                                                          std::size_t layer);

/// Normal weights with std sqrt(2/fan_in) for layers that feed a ReLU
/// (through an optional batchnorm) and sqrt(1/fan_in) otherwise; zero biases, unit gamma, zero beta,
/// running mean 0 and variance 1. Each layer draws from its own stream
/// derived from (seed, layer index).
template <typename T>
std::vector<Parameter<T>> init_layer_params(const NetworkSpec& spec, std::size_t layer,
                                            std::uint64_t seed);

template <typename T>
ParamStore<T> init_params(const NetworkSpec& spec, std::uint64_t seed);

template <typename T>
struct GradientResult {
  double loss = 0.0;
  std::size_t correct = 0;
  Tensor<T> probabilities;
  GradStore<T> grads;
};

template <typename T>
class Network {
 public:
  Network(NetworkSpec spec, ParamStore<T> params);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const ParamStore<T>& params() const noexcept { return params_; }
  ParamStore<T>& params() noexcept { return params_; }
  std::size_t num_classes() const noexcept { return spec_.num_classes; }
  const std::vector<FeatureShape>& output_shapes() const noexcept { return shapes_; }

  /// Logits in infer mode. Pure: batchnorm reads running statistics only.
  Tensor<T> infer(const Tensor<T>& batch) const;
  /// Output of layer `last_layer` (inclusive) in infer mode.
  Tensor<T> infer_to(const Tensor<T>& batch, std::size_t last_layer) const;

  /// Logits; train mode normalizes with batch statistics and updates the
  /// running statistics.
  Tensor<T> forward(const Tensor<T>& batch, Mode mode);

  /// Train-mode forward, softmax cross-entropy against `targets`, backward.
  GradientResult<T> compute_gradients(const Tensor<T>& batch, std::span<const int> targets);

 private:
  struct LayerCache {
    Tensor<T> input;
    BatchNormCache<T> norm;
    std::vector<std::size_t> argmax;
    Shape input_shape;
  };

  void check_input(const Tensor<T>& batch) const;
  Tensor<T> run(const Tensor<T>& batch, std::size_t last_layer, Mode mode,
                std::vector<LayerCache>* caches, ParamStore<T>* running) const;

  NetworkSpec spec_;
  ParamStore<T> params_;
  std::vector<FeatureShape> shapes_;
};

}  // namespace scnn::nn
