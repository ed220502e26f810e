#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace scnn::cli {

struct ApiBuildArgs {
  std::string frames;
  std::string out;
  bool no_direction_filter = false;
  std::string norm = "max";
  std::string outline = "binarize";
};

// Optimizer and logging knobs shared by train and transfer.
struct TrainingArgs {
  std::uint64_t seed = 0;
  double lr = 0.01;
  double momentum = 0.9;
  double l2 = 0.004;
  std::size_t batch = 45;
  std::size_t epochs = 30;
  double drop_factor = 0.1;
  std::size_t drop_period = 8;
  std::optional<std::size_t> max_iterations;
  std::optional<double> stop_loss;
  std::string log;
  bool no_clock = false;
};

struct TrainArgs {
  std::string manifest;
  std::string classes;
  std::string out;
  std::string arch = "scnn";
  std::size_t channels = 1;
  std::size_t hidden = 64;
  TrainingArgs training;
};

struct TransferArgs {
  std::string source;
  std::string new_class;
  std::string new_manifest;
  std::string old_manifest;
  double old_fraction = 0.2;
  std::size_t new_count = 100;
  std::string freeze_through;
  std::string out;
  TrainingArgs training;
};

struct EvalArgs {
  std::string ckpt;
  std::string manifest;
  std::string report;
  std::string records;
  std::string positive;
  std::string style = "aligned";
};

struct InspectArgs {
  std::string ckpt;
  std::string api;
  std::string layer;
  std::string out;
};

struct SynthArgs {
  std::string kind;
  std::size_t frames = 40;
  std::uint64_t seed = 0;
  std::string out;
  int width = 256;
  int height = 256;
  double illumination = 1.0;
  // glyph datasets
  int classes = 5;
  std::size_t per_class = 90;
  int side = 64;
};

int run_api_build(const ApiBuildArgs& a);
int run_train(const TrainArgs& a);
int run_transfer(const TransferArgs& a);
int run_eval(const EvalArgs& a);
int run_inspect(const InspectArgs& a);
int run_synth(const SynthArgs& a);

}  // namespace scnn::cli
