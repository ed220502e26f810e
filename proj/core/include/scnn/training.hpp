#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/network.hpp"

namespace scnn::train {

struct TrainConfig {
  double initial_lr = 0.01;
  double momentum = 0.9;
  double l2_lambda = 0.004;
  std::size_t batch_size = 45;
  double lr_drop_factor = 0.1;
  std::size_t lr_drop_period_epochs = 8;
  std::size_t max_epochs = 30;
  /// Stop once this many consecutive log records have a loss below the threshold.
  std::optional<double> loss_stop_threshold;
  std::size_t stop_patience = 3;
  /// Hard stop after this many iterations.
  std::optional<std::size_t> max_iterations;
  std::uint64_t seed = 0;
  std::size_t log_every = 10;
  /// Layers [0, freeze_through] keep their parameters.
  std::optional<std::size_t> freeze_through;

  void validate() const;
};

struct TrainLogRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  double elapsed_seconds = 0.0;
  double accuracy_percent = 0.0;
  double loss = 0.0;
  double base_lr = 0.0;

  bool operator==(const TrainLogRecord&) const = default;
};

enum class StopReason { MaxEpochs, MaxIterations, LossThreshold };

struct TrainResult {
  std::vector<TrainLogRecord> log;
  std::size_t iterations = 0;
  std::size_t iterations_per_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
};

/// Piecewise schedule: initial_lr * drop_factor^floor((epoch-1)/drop_period), epoch 1-based.
double lr_at(const TrainConfig& cfg, std::size_t epoch);

/// One SGD-with-momentum update over every learnable parameter of layers
/// [first_layer, end):  g' = g + l2*w (weights only), v = momentum*v - lr*g', w += v.
template <typename T>
void sgdm_step(nn::ParamStore<T>& params, const nn::GradStore<T>& grads, double lr, double momentum,
               double l2_lambda, std::size_t first_layer = 0);

using LogSink = std::function<void(const TrainLogRecord&)>;

/// Seeded shuffle each epoch, floor(N / batch) iterations, remainder dropped.
/// A record is logged at iteration 1, every `log_every` iterations and at the
/// final iteration. Accuracy and loss come from the forward pass that produced
/// the gradient, before the update.
template <typename T>
TrainResult train(nn::Network<T>& network, std::span<const LabeledImage> data,
                  const TrainConfig& cfg, const LogSink& on_log = {});

std::string format_elapsed(double seconds);
/// Four decimals down to 0.001, five below that (0.0100, 0.0010, 0.00010).
std::string format_learning_rate(double lr);
std::string log_header();
/// Tab-separated: epoch, iteration, hh:mm:ss, accuracy %, loss, base LR.
/// Without the clock the elapsed column reads "--:--:--".
std::string format_log_record(const TrainLogRecord& record, bool with_clock = true);

}  // namespace scnn::train
