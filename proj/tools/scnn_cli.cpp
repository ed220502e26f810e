#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace scnn::cli;

namespace {

void add_training_options(CLI::App* cmd, TrainingArgs& t) {
  cmd->add_option("--seed", t.seed, "Seed for shuffling and initialization");
  cmd->add_option("--lr", t.lr, "Initial learning rate")->capture_default_str();
  cmd->add_option("--momentum", t.momentum, "SGD momentum")->capture_default_str();
  cmd->add_option("--l2", t.l2, "L2 regularization factor")->capture_default_str();
  cmd->add_option("--batch", t.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Maximum epochs")->capture_default_str();
  cmd->add_option("--drop-factor", t.drop_factor, "Learning-rate drop factor")->capture_default_str();
  cmd->add_option("--drop-period", t.drop_period, "Epochs between learning-rate drops")->capture_default_str();
  cmd->add_option("--max-iterations", t.max_iterations, "Stop after this many iterations");
  cmd->add_option("--stop-loss", t.stop_loss, "Stop once three logged losses in a row fall below this");
  cmd->add_option("--log", t.log, "Also write the progress table to this file");
  cmd->add_flag("--no-clock", t.no_clock, "Print --:--:-- instead of elapsed time (reproducible logs)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action pattern images, series CNN training, transfer and evaluation"};
  app.require_subcommand(1);
  app.failure_message([](const CLI::App*, const CLI::Error& e) {
    return std::string("scnn: error: ") + e.what() + "\n";
  });

  ApiBuildArgs api_args;
  auto* api = app.add_subcommand("api", "Action pattern image tools");
  api->require_subcommand(1);
  auto* build = api->add_subcommand("build", "Build an action pattern image from a frame directory");
  build->add_option("--frames", api_args.frames, "Directory of P5/P6 frames")->required()->check(CLI::ExistingDirectory);
  build->add_option("--out", api_args.out, "Output PGM")->required();
  build->add_flag("--no-direction-filter", api_args.no_direction_filter, "Keep edges of every orientation");
  build->add_option("--norm", api_args.norm, "Difference normalization")
      ->check(CLI::IsMember({"fixed", "max"}))->capture_default_str();
  build->add_option("--outline", api_args.outline, "Outline of the accumulated edges")
      ->check(CLI::IsMember({"binarize", "perimeter"}))->capture_default_str();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a network from a manifest");
  train->add_option("--manifest", train_args.manifest, "path<TAB>label manifest")->required();
  train->add_option("--classes", train_args.classes, "Comma-separated class list, in output order")->required();
  train->add_option("--out", train_args.out, "Checkpoint to write")->required();
  train->add_option("--arch", train_args.arch, "Full 14-stage network or the 4-stage compact one")
      ->check(CLI::IsMember({"scnn", "compact"}))->capture_default_str();
  train->add_option("--channels", train_args.channels, "Input channels (the image is replicated)")
      ->check(CLI::Range(1, 3))->capture_default_str();
  train->add_option("--hidden", train_args.hidden, "FC1 width of the compact network")->capture_default_str();
  add_training_options(train, train_args.training);

  TransferArgs transfer_args;
  auto* transfer = app.add_subcommand("transfer", "Add a class to a trained network");
  transfer->add_option("--source", transfer_args.source, "Source checkpoint")->required();
  transfer->add_option("--new-class", transfer_args.new_class, "Label of the added class")->required();
  transfer->add_option("--new-manifest", transfer_args.new_manifest, "Manifest holding the new class")->required();
  transfer->add_option("--old-manifest", transfer_args.old_manifest, "Manifest of the source classes")->required();
  transfer->add_option("--old-fraction", transfer_args.old_fraction, "Share of each old class to keep")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  transfer->add_option("--new-count", transfer_args.new_count, "New-class images to use")->capture_default_str();
  transfer->add_option("--freeze-through", transfer_args.freeze_through, "Keep layers up to this one fixed");
  transfer->add_option("--out", transfer_args.out, "Checkpoint to write")->required();
  add_training_options(transfer, transfer_args.training);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Confusion matrix and metrics on a labelled set");
  eval->add_option("--ckpt", eval_args.ckpt, "Checkpoint")->required();
  eval->add_option("--manifest", eval_args.manifest, "Test manifest")->required();
  eval->add_option("--report", eval_args.report, "Write the text report here too");
  eval->add_option("--records", eval_args.records, "Write tab-separated records here");
  eval->add_option("--positive", eval_args.positive, "Class for one-vs-rest sensitivity/specificity");
  eval->add_option("--style", eval_args.style, "Matrix layout")
      ->check(CLI::IsMember({"aligned", "tabs"}))->capture_default_str();

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "Dump filters, or activations for one image");
  inspect->add_option("--ckpt", inspect_args.ckpt, "Checkpoint")->required();
  inspect->add_option("--api", inspect_args.api, "Binary PGM input; selects activations");
  inspect->add_option("--layer", inspect_args.layer, "Layer name, e.g. C2")->required();
  inspect->add_option("--out", inspect_args.out, "Output PGM")->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic clip or glyph dataset");
  synth->add_option("--kind", synth_args.kind, "translate-square, wave-bar, static or glyphs")
      ->required()->check(CLI::IsMember({"translate-square", "wave-bar", "static", "glyphs"}));
  synth->add_option("--frames", synth_args.frames, "Clip length")->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "Seed")->capture_default_str();
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--width", synth_args.width, "Frame width")->capture_default_str();
  synth->add_option("--height", synth_args.height, "Frame height")->capture_default_str();
  synth->add_option("--illumination", synth_args.illumination, "Global intensity factor")->capture_default_str();
  synth->add_option("--classes", synth_args.classes, "Glyph classes")->capture_default_str();
  synth->add_option("--per-class", synth_args.per_class, "Glyphs per class")->capture_default_str();
  synth->add_option("--side", synth_args.side, "Glyph canvas side")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (build->parsed()) return run_api_build(api_args);
    if (train->parsed()) return run_train(train_args);
    if (transfer->parsed()) return run_transfer(transfer_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (inspect->parsed()) return run_inspect(inspect_args);
    if (synth->parsed()) return run_synth(synth_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "scnn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
