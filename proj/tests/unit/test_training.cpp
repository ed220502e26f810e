#include <gtest/gtest.h>

#include <cmath>

#include "published.hpp"
#include "scnn/architecture.hpp"
#include "scnn/synth.hpp"
#include "scnn/training.hpp"

using namespace scnn;
using namespace scnn::nn;
using namespace scnn::train;

namespace {

ParamStore<double> scalar_store(double w) {
  ParamStore<double> p;
  p.layers.push_back({{ParamRole::Weights, Tensor<double>({1}, w), {}}});
  return p;
}

NetworkSpec small_spec(std::size_t classes) {
  NetworkSpec spec;
  spec.input = {16, 16, 1};
  spec.num_classes = classes;
  spec.layers = {LayerSpec::conv("C1", 4),           LayerSpec::batchnorm("B1"),
                 LayerSpec::relu("R1"),              LayerSpec::maxpool("P1"),
                 LayerSpec::fully_connected("FC1", 8), LayerSpec::fully_connected("FC2", classes),
                 LayerSpec::softmax_xent("xent", classes)};
  return spec;
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.max_epochs = 2;
  cfg.seed = 5;
  cfg.log_every = 3;
  return cfg;
}

}  // namespace

TEST(LearningRate, PiecewiseSchedule) {
  TrainConfig cfg;
  cfg.initial_lr = 0.01;
  cfg.lr_drop_factor = 0.1;
  cfg.lr_drop_period_epochs = 8;
  EXPECT_DOUBLE_EQ(lr_at(cfg, 1), 0.01);
  EXPECT_DOUBLE_EQ(lr_at(cfg, 8), 0.01);
  EXPECT_NEAR(lr_at(cfg, 9), 0.001, 1e-15);
  EXPECT_NEAR(lr_at(cfg, 17), 0.0001, 1e-16);
  EXPECT_THROW(lr_at(cfg, 0), std::invalid_argument);
}

TEST(LearningRate, PrintedColumnMatchesPublishedTable) {
  TrainConfig cfg;
  for (const auto& row : published::learning_rates()) {
    EXPECT_EQ(format_learning_rate(lr_at(cfg, row.epoch)), row.printed) << row.epoch;
  }
}

TEST(LogFormat, RecordAndClock) {
  const TrainLogRecord r{3, 27, 3725.9, 95.5555, 0.123456, 0.001};
  EXPECT_EQ(format_log_record(r), "3\t27\t01:02:05\t95.56%\t0.1235\t0.0010");
  EXPECT_EQ(format_log_record(r, false), "3\t27\t--:--:--\t95.56%\t0.1235\t0.0010");
  EXPECT_EQ(format_elapsed(0.4), "00:00:00");
  const std::string header = log_header();
  EXPECT_EQ(std::count(header.begin(), header.end(), '\t'), 5);
}

TEST(Sgdm, HalfSquareRecurrence) {
  // f(w) = w^2/2, g = w. Oracle iterates the 2x2 linear map on (w, v).
  const double lr = 0.1, mu = 0.9;
  ParamStore<double> p = scalar_store(1.0);
  double w = 1.0, v = 0.0;
  for (int t = 0; t < 60; ++t) {
    GradStore<double> g;
    g.layers.push_back({p.layers[0][0].value});
    sgdm_step(p, g, lr, mu, 0.0);
    const double nv = mu * v - lr * w;
    const double nw = (1.0 - lr) * w + mu * v;
    w = nw;
    v = nv;
    ASSERT_NEAR(p.layers[0][0].value[0], w, 1e-10) << t;
    ASSERT_NEAR(p.layers[0][0].velocity[0], v, 1e-10) << t;
  }
  EXPECT_LT(std::abs(w), 0.1);
}

TEST(Sgdm, FirstStepFromZeroVelocity) {
  ParamStore<double> p = scalar_store(2.0);
  GradStore<double> g;
  g.layers.push_back({Tensor<double>({1}, 0.5)});
  sgdm_step(p, g, 0.01, 0.9, 0.0);
  EXPECT_NEAR(p.layers[0][0].value[0], 2.0 - 0.005, 1e-15);
  sgdm_step(p, g, 0.01, 0.9, 0.0);
  EXPECT_NEAR(p.layers[0][0].value[0], 2.0 - 0.005 - (0.9 * 0.005 + 0.005), 1e-15);
}

TEST(Sgdm, WeightDecayOnWeightsOnly) {
  ParamStore<double> p;
  p.layers.push_back({{ParamRole::Weights, Tensor<double>({2}, 3.0), {}},
                      {ParamRole::Bias, Tensor<double>({2}, 3.0), {}}});
  p.layers.push_back({{ParamRole::Gamma, Tensor<double>({1}, 1.0), {}},
                      {ParamRole::Beta, Tensor<double>({1}, 0.0), {}},
                      {ParamRole::RunningMean, Tensor<double>({1}, 0.7), {}},
                      {ParamRole::RunningVar, Tensor<double>({1}, 1.3), {}}});
  GradStore<double> g;
  g.layers.push_back({Tensor<double>({2}, 0.0), Tensor<double>({2}, 0.0)});
  g.layers.push_back({Tensor<double>({1}, 0.0), Tensor<double>({1}, 0.0), {}, {}});
  sgdm_step(p, g, 0.1, 0.9, 0.004);
  EXPECT_NEAR(p.layers[0][0].value[0], 3.0 - 0.1 * 0.004 * 3.0, 1e-15);
  EXPECT_EQ(p.layers[0][1].value[0], 3.0);
  EXPECT_EQ(p.layers[1][0].value[0], 1.0);
  EXPECT_EQ(p.layers[1][2].value[0], 0.7);
  EXPECT_EQ(p.layers[1][3].value[0], 1.3);
}

TEST(Sgdm, FrozenLayersUntouched) {
  ParamStore<double> p = scalar_store(1.0);
  p.layers.push_back(p.layers[0]);
  GradStore<double> g;
  g.layers.push_back({Tensor<double>({1}, 1.0)});
  g.layers.push_back({Tensor<double>({1}, 1.0)});
  sgdm_step(p, g, 0.5, 0.0, 0.0, 1);
  EXPECT_EQ(p.layers[0][0].value[0], 1.0);
  EXPECT_EQ(p.layers[1][0].value[0], 0.5);
}

TEST(Sgdm, MismatchedStoresRejected) {
  ParamStore<double> p = scalar_store(1.0);
  GradStore<double> g;
  EXPECT_THROW(sgdm_step(p, g, 0.1, 0.9, 0.0), ShapeError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.initial_lr = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Train, IterationsPerEpochDropRemainder) {
  for (auto [n, expect] : {std::pair<std::size_t, std::size_t>{450, 10}, {200, 4}}) {
    const auto data = synth::glyph_dataset(5, n / 5, 16, 1);
    const NetworkSpec spec = small_spec(5);
    Network<float> net(spec, init_params<float>(spec, 1));
    TrainConfig cfg;
    cfg.batch_size = 45;
    cfg.max_epochs = 1;
    const TrainResult r = train::train(net, std::span<const LabeledImage>(data), cfg);
    EXPECT_EQ(r.iterations_per_epoch, expect);
    EXPECT_EQ(r.iterations, expect);
    EXPECT_EQ(r.stop_reason, StopReason::MaxEpochs);
  }
}

TEST(Train, LogCadenceAndRecords) {
  const auto data = synth::glyph_dataset(3, 20, 16, 2);
  const NetworkSpec spec = small_spec(3);
  Network<float> net(spec, init_params<float>(spec, 2));
  const TrainConfig cfg = quick_config();  // 6 iterations per epoch, 12 total
  std::vector<TrainLogRecord> streamed;
  const TrainResult r =
      train::train(net, std::span<const LabeledImage>(data), cfg, [&](const TrainLogRecord& rec) { streamed.push_back(rec); });
  std::vector<std::size_t> its;
  for (const auto& rec : r.log) its.push_back(rec.iteration);
  EXPECT_EQ(its, (std::vector<std::size_t>{1, 3, 6, 9, 12}));
  EXPECT_EQ(streamed, r.log);
  EXPECT_EQ(r.log.front().epoch, 1u);
  EXPECT_EQ(r.log.back().epoch, 2u);
  for (const auto& rec : r.log) {
    EXPECT_TRUE(std::isfinite(rec.loss));
    EXPECT_GE(rec.accuracy_percent, 0.0);
    EXPECT_LE(rec.accuracy_percent, 100.0);
    EXPECT_DOUBLE_EQ(rec.base_lr, 0.01);
  }
}

TEST(Train, DeterministicForFixedSeed) {
  const auto data = synth::glyph_dataset(3, 20, 16, 3);
  const NetworkSpec spec = small_spec(3);
  auto run = [&] {
    Network<float> net(spec, init_params<float>(spec, 3));
    TrainResult r = train::train(net, std::span<const LabeledImage>(data), quick_config());
    for (auto& rec : r.log) rec.elapsed_seconds = 0;
    return std::pair{r.log, net.params().layers};
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  for (std::size_t i = 0; i < a.second.size(); ++i)
    for (std::size_t j = 0; j < a.second[i].size(); ++j) EXPECT_EQ(a.second[i][j].value, b.second[i][j].value);
}

TEST(Train, StopConditions) {
  const auto data = synth::glyph_dataset(3, 20, 16, 4);
  const NetworkSpec spec = small_spec(3);
  {
    Network<float> net(spec, init_params<float>(spec, 4));
    TrainConfig cfg = quick_config();
    cfg.max_iterations = 4;
    const TrainResult r = train::train(net, std::span<const LabeledImage>(data), cfg);
    EXPECT_EQ(r.iterations, 4u);
    EXPECT_EQ(r.stop_reason, StopReason::MaxIterations);
    EXPECT_EQ(r.log.back().iteration, 4u);
  }
  {
    Network<float> net(spec, init_params<float>(spec, 4));
    TrainConfig cfg = quick_config();
    cfg.log_every = 1;
    cfg.loss_stop_threshold = 1e9;
    const TrainResult r = train::train(net, std::span<const LabeledImage>(data), cfg);
    EXPECT_EQ(r.iterations, cfg.stop_patience);
    EXPECT_EQ(r.stop_reason, StopReason::LossThreshold);
  }
}

TEST(Train, InputErrors) {
  const NetworkSpec spec = small_spec(3);
  Network<float> net(spec, init_params<float>(spec, 4));
  const auto few = synth::glyph_dataset(3, 2, 16, 5);
  EXPECT_THROW(train::train(net, std::span<const LabeledImage>(few), quick_config()), std::invalid_argument);
  const auto wrong_size = synth::glyph_dataset(3, 10, 32, 5);
  EXPECT_THROW(train::train(net, std::span<const LabeledImage>(wrong_size), quick_config()), std::invalid_argument);
  auto bad_label = synth::glyph_dataset(3, 10, 16, 5);
  bad_label[0].label = 3;
  EXPECT_THROW(train::train(net, std::span<const LabeledImage>(bad_label), quick_config()), std::invalid_argument);
}

TEST(Train, LossDecreasesOnSeparableGlyphs) {
  const auto data = synth::glyph_dataset(3, 30, 16, 6);
  const NetworkSpec spec = small_spec(3);
  Network<float> net(spec, init_params<float>(spec, 6));
  TrainConfig cfg = quick_config();
  cfg.max_epochs = 15;
  const TrainResult r = train::train(net, std::span<const LabeledImage>(data), cfg);
  EXPECT_LT(r.log.back().loss, r.log.front().loss);
}
