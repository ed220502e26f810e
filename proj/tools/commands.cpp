#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "scnn/api_builder.hpp"
#include "scnn/architecture.hpp"
#include "scnn/checkpoint.hpp"
#include "scnn/evaluation.hpp"
#include "scnn/manifest.hpp"
#include "scnn/netpbm.hpp"
#include "scnn/synth.hpp"
#include "scnn/training.hpp"
#include "scnn/transfer.hpp"

namespace fs = std::filesystem;

namespace scnn::cli {
namespace {

train::TrainConfig make_config(const TrainingArgs& a) {
  train::TrainConfig cfg;
  cfg.initial_lr = a.lr;
  cfg.momentum = a.momentum;
  cfg.l2_lambda = a.l2;
  cfg.batch_size = a.batch;
  cfg.max_epochs = a.epochs;
  cfg.lr_drop_factor = a.drop_factor;
  cfg.lr_drop_period_epochs = a.drop_period;
  cfg.max_iterations = a.max_iterations;
  cfg.loss_stop_threshold = a.stop_loss;
  cfg.seed = a.seed;
  cfg.validate();
  return cfg;
}

// Writes the progress table to stdout and, when asked, to a log file.
class ProgressLog {
 public:
  ProgressLog(const std::string& path, bool with_clock) : with_clock_(with_clock) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw std::runtime_error(path + ": cannot open log for writing");
    }
    line(train::log_header());
  }

  void operator()(const train::TrainLogRecord& r) { line(train::format_log_record(r, with_clock_)); }

 private:
  void line(const std::string& s) {
    std::cout << s << '\n' << std::flush;
    if (file_.is_open()) file_ << s << '\n' << std::flush;
  }

  bool with_clock_;
  std::ofstream file_;
};

const char* stop_reason_name(train::StopReason r) {
  switch (r) {
    case train::StopReason::MaxEpochs: return "max epochs";
    case train::StopReason::MaxIterations: return "max iterations";
    case train::StopReason::LossThreshold: return "loss threshold";
  }
  return "?";
}

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument("unknown class label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace

int run_api_build(const ApiBuildArgs& a) {
  api::ApiOptions opts;
  opts.direction_filter = !a.no_direction_filter;
  opts.normalization = a.norm == "fixed" ? api::Normalization::Fixed : api::Normalization::FrameMax;
  opts.outline = a.outline == "perimeter" ? api::Outline::Perimeter : api::Outline::Binarize;
  std::size_t processed = 0;
  opts.on_frame = [&](std::size_t, const imaging::BinaryImage&) { ++processed; };

  const api::FrameSequence seq = io::load_frames(a.frames);
  const api::ActionPatternImage result = api::build_api(seq, opts);
  io::save_api(a.out, result);
  std::size_t on = 0;
  for (auto v : result.pixels.pixels()) on += v;
  std::cout << a.out << ": " << on << " edge pixels from " << processed << " of " << seq.size()
            << " frames\n";
  return 0;
}

int run_train(const TrainArgs& a) {
  const std::vector<std::string> classes = io::parse_class_list(a.classes);
  const io::Manifest manifest = io::read_manifest(a.manifest, classes);
  const std::vector<LabeledImage> data = io::load_dataset(manifest);
  const int side = data.front().image.width();
  if (data.front().image.height() != side) throw std::invalid_argument("training images must be square");

  nn::NetworkSpec spec;
  if (a.arch == "scnn") {
    spec = build_scnn(classes.size(), a.channels);
  } else {
    spec = build_compact_scnn(classes.size(), static_cast<std::size_t>(side), a.channels, a.hidden);
  }
  nn::Network<float> net(spec, nn::init_params<float>(spec, a.training.seed));
  const train::TrainConfig cfg = make_config(a.training);

  ProgressLog log(a.training.log, !a.training.no_clock);
  const train::TrainResult r = train::train(net, std::span<const LabeledImage>(data), cfg, std::ref(log));
  io::save_checkpoint(a.out, io::make_checkpoint(net, classes));
  std::cout << "saved " << a.out << " after " << r.iterations << " iterations ("
            << r.iterations_per_epoch << " per epoch, stopped on " << stop_reason_name(r.stop_reason)
            << ")\n";
  return 0;
}

int run_transfer(const TransferArgs& a) {
  const io::Checkpoint source_ckpt = io::load_checkpoint(a.source);
  const nn::Network<float> source = source_ckpt.network();
  const std::vector<std::string>& old_labels = source_ckpt.labels;
  if (std::find(old_labels.begin(), old_labels.end(), a.new_class) != old_labels.end()) {
    throw std::invalid_argument("class '" + a.new_class + "' is already known to the source network");
  }

  // Records of other labels (e.g. the new class in a combined manifest) are ignored.
  io::Manifest old_manifest = io::read_manifest(a.old_manifest);
  std::erase_if(old_manifest.records, [&](const io::ManifestRecord& r) {
    return std::find(old_labels.begin(), old_labels.end(), r.label) == old_labels.end();
  });
  for (io::ManifestRecord& r : old_manifest.records) r.class_index = static_cast<int>(label_index(old_labels, r.label));
  old_manifest.classes = old_labels;
  std::vector<std::vector<imaging::BinaryImage>> old_by_class(old_labels.size());
  for (LabeledImage& s : io::load_dataset(old_manifest)) old_by_class[s.label].push_back(std::move(s.image));
  for (std::size_t c = 0; c < old_labels.size(); ++c) {
    if (old_by_class[c].empty()) throw std::invalid_argument("old manifest has no samples of '" + old_labels[c] + "'");
  }

  io::Manifest new_manifest = io::read_manifest(a.new_manifest);
  std::erase_if(new_manifest.records, [&](const io::ManifestRecord& r) { return r.label != a.new_class; });
  if (new_manifest.records.empty()) {
    throw std::invalid_argument(a.new_manifest + ": no records labelled '" + a.new_class + "'");
  }
  std::vector<imaging::BinaryImage> new_images;
  for (LabeledImage& s : io::load_dataset(new_manifest)) new_images.push_back(std::move(s.image));

  transfer::TransferPlan plan;
  plan.new_labels = old_labels;
  plan.new_labels.push_back(a.new_class);
  plan.old_data_fraction = a.old_fraction;
  plan.new_class_api_count = a.new_count;
  plan.seed = a.training.seed;

  train::TrainConfig cfg = make_config(a.training);
  if (!a.freeze_through.empty()) cfg.freeze_through = source.spec().index_of(a.freeze_through);

  ProgressLog log(a.training.log, !a.training.no_clock);
  const transfer::TransferOutcome<float> out =
      transfer::transfer_train(source, old_labels, old_by_class, new_images, plan, cfg, std::ref(log));
  io::save_checkpoint(a.out, io::make_checkpoint(out.network, plan.new_labels));
  std::cout << "saved " << a.out << " (" << plan.new_labels.size() << " classes, "
            << out.dataset.size() << " training images, " << out.training.iterations
            << " iterations)\n";
  return 0;
}

int run_eval(const EvalArgs& a) {
  const io::Checkpoint ckpt = io::load_checkpoint(a.ckpt);
  const nn::Network<float> net = ckpt.network();
  const io::Manifest manifest = io::read_manifest(a.manifest, ckpt.labels);
  const std::vector<LabeledImage> data = io::load_dataset(manifest);

  const eval::ConfusionMatrix cm = eval::confusion(net, std::span<const LabeledImage>(data), ckpt.labels);
  std::optional<std::size_t> positive;
  if (!a.positive.empty()) positive = label_index(ckpt.labels, a.positive);
  const eval::Metrics m = eval::metrics(cm, positive);

  const eval::TableStyle style = a.style == "tabs" ? eval::TableStyle::Tabs : eval::TableStyle::Aligned;
  const std::string report = eval::render_confusion_text(cm, style) + "\n" + eval::render_metrics_text(cm, m);
  std::cout << report;
  if (!a.report.empty()) write_text(a.report, report);
  if (!a.records.empty()) write_text(a.records, eval::render_records(cm, m));
  return 0;
}

int run_inspect(const InspectArgs& a) {
  const io::Checkpoint ckpt = io::load_checkpoint(a.ckpt);
  const nn::Network<float> net = ckpt.network();
  std::size_t tiles = 0;
  imaging::GrayImage grid;
  if (a.api.empty()) {
    grid = eval::dump_filters(net, a.layer, &tiles);
  } else {
    const imaging::BinaryImage input = io::load_binary_pgm(a.api);
    grid = eval::dump_activations(net, input, a.layer, &tiles);
  }
  io::write_pgm(a.out, grid);
  std::cout << a.out << ": " << tiles << " tiles, " << grid.width() << "x" << grid.height() << "\n";
  return 0;
}

int run_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  if (a.kind == "glyphs") {
    std::vector<io::ManifestRecord> records;
    const std::vector<LabeledImage> data = synth::glyph_dataset(a.classes, a.per_class, a.side, a.seed);
    std::vector<std::size_t> seen(static_cast<std::size_t>(a.classes), 0);
    for (const LabeledImage& s : data) {
      char name[64];
      std::snprintf(name, sizeof name, "glyph%d_%04zu.pgm", s.label, seen[s.label]++);
      const fs::path path = fs::path(a.out) / name;
      io::save_binary_pgm(path, s.image);
      records.push_back({path, "glyph" + std::to_string(s.label), s.label});
    }
    const fs::path manifest = fs::path(a.out) / "manifest.tsv";
    io::write_manifest(manifest, records);
    std::cout << manifest.string() << ": " << records.size() << " glyph images\n";
    return 0;
  }

  synth::VideoOptions o;
  o.kind = synth::parse_video_kind(a.kind);
  o.frames = a.frames;
  o.seed = a.seed;
  o.width = a.width;
  o.height = a.height;
  o.illumination = a.illumination;
  io::save_frames(a.out, synth::synth_video(o));
  std::cout << a.out << ": " << o.frames << " frames of " << a.kind << "\n";
  return 0;
}

}  // namespace scnn::cli
