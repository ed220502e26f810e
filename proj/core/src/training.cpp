#include "scnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace scnn::train {

void TrainConfig::validate() const {
  if (!(initial_lr > 0.0)) throw std::invalid_argument("initial learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0,1)");
  if (!(l2_lambda >= 0.0)) throw std::invalid_argument("L2 factor must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("batch size must be >= 2 for batch normalization");
  if (!(lr_drop_factor > 0.0)) throw std::invalid_argument("learning-rate drop factor must be > 0");
  if (lr_drop_period_epochs == 0) throw std::invalid_argument("drop period must be >= 1 epoch");
  if (max_epochs == 0) throw std::invalid_argument("max epochs must be >= 1");
  if (stop_patience == 0) throw std::invalid_argument("stop patience must be >= 1");
  if (log_every == 0) throw std::invalid_argument("log interval must be >= 1");
  if (max_iterations && *max_iterations == 0) throw std::invalid_argument("max iterations must be >= 1");
}

double lr_at(const TrainConfig& cfg, std::size_t epoch) {
  if (epoch == 0) throw std::invalid_argument("epochs are 1-based");
  const auto drops = static_cast<double>((epoch - 1) / cfg.lr_drop_period_epochs);
  return cfg.initial_lr * std::pow(cfg.lr_drop_factor, drops);
}

template <typename T>
void sgdm_step(nn::ParamStore<T>& params, const nn::GradStore<T>& grads, double lr, double momentum,
               double l2_lambda, std::size_t first_layer) {
  if (grads.layers.size() != params.layers.size()) {
    throw nn::ShapeError("gradient store does not match parameter store");
  }
  const T rate = static_cast<T>(lr);
  const T mu = static_cast<T>(momentum);
  const T decay = static_cast<T>(l2_lambda);
  for (std::size_t i = first_layer; i < params.layers.size(); ++i) {
    auto& layer = params.layers[i];
    if (grads.layers[i].size() != layer.size()) {
      throw nn::ShapeError("gradient store layer " + std::to_string(i) + " has wrong arity");
    }
    for (std::size_t j = 0; j < layer.size(); ++j) {
      nn::Parameter<T>& p = layer[j];
      if (!nn::is_learnable(p.role)) continue;
      const nn::Tensor<T>& g = grads.layers[i][j];
      if (g.shape() != p.value.shape()) {
        throw nn::ShapeError("gradient shape " + nn::to_string(g.shape()) + " vs parameter " +
                             nn::to_string(p.value.shape()));
      }
      if (p.velocity.empty()) p.velocity = nn::Tensor<T>(p.value.shape());
      const T l2 = nn::is_decayed(p.role) ? decay : T{0};
      T* w = p.value.data();
      T* v = p.velocity.data();
      const T* gr = g.data();
      for (std::size_t k = 0; k < p.value.size(); ++k) {
        const T step = gr[k] + l2 * w[k];
        v[k] = mu * v[k] - rate * step;
        w[k] += v[k];
      }
    }
  }
}

template <typename T>
TrainResult train(nn::Network<T>& network, std::span<const LabeledImage> data,
                  const TrainConfig& cfg, const LogSink& on_log) {
  cfg.validate();
  if (data.size() < cfg.batch_size) {
    throw std::invalid_argument("dataset has " + std::to_string(data.size()) +
                                " samples, fewer than one batch of " +
                                std::to_string(cfg.batch_size));
  }
  const nn::FeatureShape in = network.spec().input;
  for (const LabeledImage& s : data) {
    if (static_cast<std::size_t>(s.image.width()) != in.width ||
        static_cast<std::size_t>(s.image.height()) != in.height) {
      throw std::invalid_argument("training image size does not match the network input");
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= network.num_classes()) {
      throw std::invalid_argument("training label " + std::to_string(s.label) + " out of range");
    }
  }

  const std::size_t first_layer = cfg.freeze_through ? *cfg.freeze_through + 1 : 0;
  TrainResult result;
  result.iterations_per_epoch = data.size() / cfg.batch_size;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  std::vector<const imaging::BinaryImage*> images(cfg.batch_size);
  std::vector<int> targets(cfg.batch_size);
  std::size_t below_threshold = 0;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = lr_at(cfg, epoch);
    for (std::size_t b = 0; b < result.iterations_per_epoch; ++b) {
      const std::size_t iteration = ++result.iterations;
      for (std::size_t k = 0; k < cfg.batch_size; ++k) {
        const LabeledImage& s = data[order[b * cfg.batch_size + k]];
        images[k] = &s.image;
        targets[k] = s.label;
      }
      const nn::Tensor<T> batch = make_batch<T>(images, in.channels);
      nn::GradientResult<T> step = network.compute_gradients(batch, targets);
      sgdm_step(network.params(), step.grads, lr, cfg.momentum, cfg.l2_lambda, first_layer);

      const bool hit_max_iterations = cfg.max_iterations && iteration >= *cfg.max_iterations;
      const bool last_of_run =
          hit_max_iterations ||
          (epoch == cfg.max_epochs && b + 1 == result.iterations_per_epoch);
      if (iteration == 1 || iteration % cfg.log_every == 0 || last_of_run) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        TrainLogRecord rec{epoch,
                           iteration,
                           elapsed.count(),
                           100.0 * static_cast<double>(step.correct) / cfg.batch_size,
                           step.loss,
                           lr};
        result.log.push_back(rec);
        if (on_log) on_log(rec);
        if (cfg.loss_stop_threshold) {
          below_threshold = step.loss < *cfg.loss_stop_threshold ? below_threshold + 1 : 0;
          if (below_threshold >= cfg.stop_patience) {
            result.stop_reason = StopReason::LossThreshold;
            return result;
          }
        }
      }
      if (hit_max_iterations) {
        result.stop_reason = StopReason::MaxIterations;
        return result;
      }
    }
  }
  result.stop_reason = StopReason::MaxEpochs;
  return result;
}

std::string format_elapsed(double seconds) {
  const auto total = static_cast<long long>(std::max(0.0, seconds));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", total / 3600, (total / 60) % 60,
                total % 60);
  return buf;
}

std::string format_learning_rate(double lr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, lr >= 0.001 * (1.0 - 1e-9) ? "%.4f" : "%.5f", lr);
  return buf;
}

std::string log_header() {
  return "Epoch\tIteration\tTime Elapsed (hh:mm:ss)\tMini-batch Accuracy\tMini-batch Loss\t"
         "Base Learning Rate";
}

std::string format_log_record(const TrainLogRecord& r, bool with_clock) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu\t%zu\t%s\t%.2f%%\t%.4f\t%s", r.epoch, r.iteration,
                with_clock ? format_elapsed(r.elapsed_seconds).c_str() : "--:--:--",
                r.accuracy_percent, r.loss, format_learning_rate(r.base_lr).c_str());
  return buf;
}

template void sgdm_step(nn::ParamStore<float>&, const nn::GradStore<float>&, double, double,
                        double, std::size_t);
template void sgdm_step(nn::ParamStore<double>&, const nn::GradStore<double>&, double, double,
                        double, std::size_t);
template TrainResult train(nn::Network<float>&, std::span<const LabeledImage>, const TrainConfig&,
                           const LogSink&);
template TrainResult train(nn::Network<double>&, std::span<const LabeledImage>,
                           const TrainConfig&, const LogSink&);

}  // namespace scnn::train
