#include "scnn/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace scnn::nn {

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::SoftmaxXent: return "softmax-xent";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv(std::string name, std::size_t out_channels, std::size_t kernel,
                          std::size_t stride, std::size_t padding) {
  return {LayerKind::Conv, std::move(name), kernel, kernel, stride, padding, out_channels};
}
LayerSpec LayerSpec::batchnorm(std::string name) {
  return {LayerKind::BatchNorm, std::move(name), 0, 0, 1, 0, 0};
}
LayerSpec LayerSpec::relu(std::string name) {
  return {LayerKind::Relu, std::move(name), 0, 0, 1, 0, 0};
}
LayerSpec LayerSpec::maxpool(std::string name, std::size_t kernel, std::size_t stride,
                             std::size_t padding) {
  return {LayerKind::MaxPool, std::move(name), kernel, kernel, stride, padding, 0};
}
LayerSpec LayerSpec::fully_connected(std::string name, std::size_t units) {
  return {LayerKind::FullyConnected, std::move(name), 0, 0, 1, 0, units};
}
LayerSpec LayerSpec::softmax_xent(std::string name, std::size_t classes) {
  return {LayerKind::SoftmaxXent, std::move(name), 0, 0, 1, 0, classes};
}

std::string to_string(const FeatureShape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

std::vector<FeatureShape> NetworkSpec::output_shapes() const {
  if (input.height == 0 || input.width == 0 || input.channels == 0) {
    throw ShapeError("network input dimensions must be >= 1");
  }
  if (num_classes < 2) throw ShapeError("network needs at least 2 classes");
  if (layers.empty() || layers.back().kind != LayerKind::SoftmaxXent) {
    throw ShapeError("network must end in a softmax-xent layer");
  }
  std::vector<FeatureShape> out;
  out.reserve(layers.size());
  FeatureShape cur = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + l.name + "): ";
    try {
      switch (l.kind) {
        case LayerKind::Conv:
          if (l.units == 0) throw ShapeError("conv needs >= 1 output channel");
          if (l.kernel_h == 0 || l.kernel_w == 0 || l.stride == 0) {
            throw ShapeError("conv kernel and stride must be >= 1");
          }
          cur = {conv_output_size(cur.height, l.kernel_h, l.stride, l.padding),
                 conv_output_size(cur.width, l.kernel_w, l.stride, l.padding), l.units};
          break;
        case LayerKind::BatchNorm:
        case LayerKind::Relu:
          break;
        case LayerKind::MaxPool: {
          if (l.kernel_h != l.kernel_w) throw ShapeError("pooling windows must be square");
          const PoolGeometry g{l.kernel_h, l.stride, l.padding};
          cur = {pool_output_size(cur.height, g), pool_output_size(cur.width, g), cur.channels};
          break;
        }
        case LayerKind::FullyConnected:
          if (l.units == 0) throw ShapeError("fc needs >= 1 unit");
          cur = {1, 1, l.units};
          break;
        case LayerKind::SoftmaxXent:
          if (i + 1 != layers.size()) throw ShapeError("softmax-xent must be the last layer");
          if (l.units != num_classes) throw ShapeError("softmax-xent class count mismatch");
          if (cur != FeatureShape{1, 1, num_classes}) {
            throw ShapeError("softmax-xent input must be 1x1x" + std::to_string(num_classes) +
                             ", got " + to_string(cur));
          }
          break;
        default:
          throw ShapeError("unknown layer kind");
      }
    } catch (const ShapeError& e) {
      throw ShapeError(where + e.what());
    }
    out.push_back(cur);
  }
  return out;
}

std::size_t NetworkSpec::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  throw std::out_of_range("no layer named '" + std::string(name) + "'");
}

FeatureShape NetworkSpec::input_of(std::size_t layer) const {
  if (layer >= layers.size()) throw std::out_of_range("layer index out of range");
  if (layer == 0) return input;
  return output_shapes()[layer - 1];
}

std::vector<std::pair<ParamRole, Shape>> parameter_layout(const NetworkSpec& spec,
                                                          std::size_t layer) {
  const LayerSpec& l = spec.layers.at(layer);
  const FeatureShape in = spec.input_of(layer);
  switch (l.kind) {
    case LayerKind::Conv:
      return {{ParamRole::Weights, {l.kernel_h, l.kernel_w, in.channels, l.units}},
              {ParamRole::Bias, {l.units}}};
    case LayerKind::BatchNorm:
      return {{ParamRole::Gamma, {in.channels}},
              {ParamRole::Beta, {in.channels}},
              {ParamRole::RunningMean, {in.channels}},
              {ParamRole::RunningVar, {in.channels}}};
    case LayerKind::FullyConnected:
      return {{ParamRole::Weights, {in.count(), l.units}}, {ParamRole::Bias, {l.units}}};
    default:
      return {};
  }
}

template <typename T>
std::size_t ParamStore<T>::learnable_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) {
    for (const Parameter<T>& p : layer) {
      if (is_learnable(p.role)) total += p.value.size();
    }
  }
  return total;
}

template <typename T>
void ParamStore<T>::reset_velocities() {
  for (auto& layer : layers) {
    for (Parameter<T>& p : layer) p.velocity = Tensor<T>();
  }
}

namespace {

// The He factor of 2 compensates for a following ReLU zeroing half the
// signal. Layers without one (the fully-connected pair) use 1/fan_in.
bool feeds_relu(const NetworkSpec& spec, std::size_t layer) {
  for (std::size_t i = layer + 1; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind == LayerKind::BatchNorm) continue;
    return spec.layers[i].kind == LayerKind::Relu;
  }
  return false;
}

}  // namespace

template <typename T>
std::vector<Parameter<T>> init_layer_params(const NetworkSpec& spec, std::size_t layer,
                                            std::uint64_t seed) {
  std::vector<Parameter<T>> out;
  const auto layout = parameter_layout(spec, layer);
  if (layout.empty()) return out;

  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(layer)};
  std::mt19937_64 rng(seq);
  for (const auto& [role, shape] : layout) {
    Tensor<T> value(shape);
    switch (role) {
      case ParamRole::Weights: {
        // Conv weights are (kh,kw,cin,cout), fc weights (in,out): fan-in is
        // everything but the last axis.
        const std::size_t fan_in = value.size() / shape.back();
        const double gain = feeds_relu(spec, layer) ? 2.0 : 1.0;
        std::normal_distribution<double> normal(0.0, std::sqrt(gain / static_cast<double>(fan_in)));
        for (T& v : value.values()) v = static_cast<T>(normal(rng));
        break;
      }
      case ParamRole::Gamma:
      case ParamRole::RunningVar:
        value.fill(T{1});
        break;
      default:
        break;
    }
    out.push_back({role, std::move(value), Tensor<T>()});
  }
  return out;
}

template <typename T>
ParamStore<T> init_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamStore<T> store;
  store.layers.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    store.layers.push_back(init_layer_params<T>(spec, i, seed));
  }
  return store;
}

template <typename T>
Network<T>::Network(NetworkSpec spec, ParamStore<T> params)
    : spec_(std::move(spec)), params_(std::move(params)), shapes_(spec_.output_shapes()) {
  if (params_.layers.size() != spec_.layers.size()) {
    throw ShapeError("parameter store has " + std::to_string(params_.layers.size()) +
                     " layers, spec has " + std::to_string(spec_.layers.size()));
  }
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto layout = parameter_layout(spec_, i);
    const auto& have = params_.layers[i];
    if (have.size() != layout.size()) {
      throw ShapeError("layer " + spec_.layers[i].name + ": wrong parameter count");
    }
    for (std::size_t j = 0; j < layout.size(); ++j) {
      if (have[j].role != layout[j].first || have[j].value.shape() != layout[j].second) {
        throw ShapeError("layer " + spec_.layers[i].name + ": parameter " + std::to_string(j) +
                         " has shape " + to_string(have[j].value.shape()) + ", expected " +
                         to_string(layout[j].second));
      }
      if (!have[j].velocity.empty() && have[j].velocity.shape() != layout[j].second) {
        throw ShapeError("layer " + spec_.layers[i].name + ": velocity shape mismatch");
      }
    }
  }
}

template <typename T>
void Network<T>::check_input(const Tensor<T>& batch) const {
  const Shape expected{batch.rank() == 4 ? batch.dim(0) : 0, spec_.input.height, spec_.input.width,
                       spec_.input.channels};
  if (batch.rank() != 4 || batch.shape() != expected) {
    throw ShapeError("network input must be (n," + to_string(spec_.input) + "), got " +
                     to_string(batch.shape()));
  }
}

template <typename T>
Tensor<T> Network<T>::run(const Tensor<T>& batch, std::size_t last_layer, Mode mode,
                          std::vector<LayerCache>* caches, ParamStore<T>* running) const {
  check_input(batch);
  if (last_layer >= spec_.layers.size()) throw std::out_of_range("layer index out of range");
  if (mode == Mode::Train && running == nullptr) {
    throw InvalidStateError("train-mode forward needs mutable running statistics");
  }

  Tensor<T> x = batch;
  for (std::size_t i = 0; i <= last_layer; ++i) {
    const LayerSpec& l = spec_.layers[i];
    const auto& p = params_.layers[i];
    Tensor<T> y;
    switch (l.kind) {
      case LayerKind::Conv:
        y = conv2d_forward(x, p[0].value, p[1].value, {l.stride, l.padding});
        if (caches) (*caches)[i].input = std::move(x);
        break;
      case LayerKind::BatchNorm: {
        BatchNormCache<T>* cache = caches ? &(*caches)[i].norm : nullptr;
        if (mode == Mode::Train) {
          auto& rp = running->layers[i];
          y = batchnorm_forward(x, p[0].value, p[1].value, rp[2].value, rp[3].value, mode, cache);
        } else {
          Tensor<T> mean = p[2].value;
          Tensor<T> var = p[3].value;
          y = batchnorm_forward(x, p[0].value, p[1].value, mean, var, mode, cache);
        }
        break;
      }
      case LayerKind::Relu:
        y = relu_forward(x);
        if (caches) (*caches)[i].input = std::move(x);
        break;
      case LayerKind::MaxPool: {
        PoolResult<T> r = maxpool_forward(x, {l.kernel_h, l.stride, l.padding});
        y = std::move(r.output);
        if (caches) {
          (*caches)[i].argmax = std::move(r.argmax);
          (*caches)[i].input_shape = std::move(r.input_shape);
        }
        break;
      }
      case LayerKind::FullyConnected:
        y = fc_forward(x, p[0].value, p[1].value);
        if (caches) (*caches)[i].input = std::move(x);
        break;
      case LayerKind::SoftmaxXent:
        y = std::move(x);
        break;
    }
#ifndef NDEBUG
    if (!y.all_finite()) {
      throw std::runtime_error("non-finite activation after layer " + l.name);
    }
#endif
    x = std::move(y);
  }
  return x;
}

template <typename T>
Tensor<T> Network<T>::infer(const Tensor<T>& batch) const {
  return run(batch, spec_.layers.size() - 1, Mode::Infer, nullptr, nullptr);
}

template <typename T>
Tensor<T> Network<T>::infer_to(const Tensor<T>& batch, std::size_t last_layer) const {
  return run(batch, last_layer, Mode::Infer, nullptr, nullptr);
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& batch, Mode mode) {
  return run(batch, spec_.layers.size() - 1, mode, nullptr, mode == Mode::Train ? &params_ : nullptr);
}

template <typename T>
GradientResult<T> Network<T>::compute_gradients(const Tensor<T>& batch,
                                                std::span<const int> targets) {
  const std::size_t last = spec_.layers.size() - 1;
  std::vector<LayerCache> caches(spec_.layers.size());
  const Tensor<T> logits = run(batch, last, Mode::Train, &caches, &params_);
  SoftmaxXentResult<T> xent = softmax_xent(logits, targets);

  GradientResult<T> result;
  result.loss = xent.loss;
  const std::size_t k = spec_.num_classes;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (xent.probabilities[r * k + j] > xent.probabilities[r * k + best]) best = j;
    }
    if (best == static_cast<std::size_t>(targets[r])) ++result.correct;
  }

  result.grads.layers.resize(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    result.grads.layers[i].resize(params_.layers[i].size());
  }

  Tensor<T> g = std::move(xent.grad_logits);
  for (std::size_t i = last + 1; i-- > 0;) {
    const LayerSpec& l = spec_.layers[i];
    const auto& p = params_.layers[i];
    auto& out = result.grads.layers[i];
    LayerCache& cache = caches[i];
    switch (l.kind) {
      case LayerKind::SoftmaxXent:
        break;
      case LayerKind::FullyConnected: {
        FcGradients<T> fg = fc_backward(cache.input, p[0].value, g);
        out[0] = std::move(fg.weights);
        out[1] = std::move(fg.bias);
        g = std::move(fg.input);
        break;
      }
      case LayerKind::Relu:
        g = relu_backward(cache.input, g);
        break;
      case LayerKind::MaxPool:
        g = maxpool_backward<T>(cache.argmax, cache.input_shape, g);
        break;
      case LayerKind::BatchNorm: {
        BatchNormGradients<T> bg = batchnorm_backward(cache.norm, p[0].value, g);
        out[0] = std::move(bg.gamma);
        out[1] = std::move(bg.beta);
        g = std::move(bg.input);
        break;
      }
      case LayerKind::Conv: {
        ConvGradients<T> cg = conv2d_backward(cache.input, p[0].value, g, {l.stride, l.padding});
        out[0] = std::move(cg.weights);
        out[1] = std::move(cg.bias);
        g = std::move(cg.input);
        break;
      }
    }
    cache = LayerCache{};
  }
  result.probabilities = std::move(xent.probabilities);
  return result;
}

template struct ParamStore<float>;
template struct ParamStore<double>;
template std::vector<Parameter<float>> init_layer_params(const NetworkSpec&, std::size_t,
                                                         std::uint64_t);
template std::vector<Parameter<double>> init_layer_params(const NetworkSpec&, std::size_t,
                                                          std::uint64_t);
template ParamStore<float> init_params(const NetworkSpec&, std::uint64_t);
template ParamStore<double> init_params(const NetworkSpec&, std::uint64_t);
template class Network<float>;
template class Network<double>;

}  // namespace scnn::nn
