#include "scnn/architecture.hpp"

#include <stdexcept>

namespace scnn {

using nn::LayerKind;
using nn::LayerSpec;
using nn::NetworkSpec;

namespace {

void add_stage(NetworkSpec& spec, std::size_t stage, std::size_t channels) {
  const std::string id = std::to_string(stage);
  spec.layers.push_back(LayerSpec::conv("C" + id, channels, 3, 1, 1));
  spec.layers.push_back(LayerSpec::batchnorm("B" + id));
  spec.layers.push_back(LayerSpec::relu("R" + id));
}

void check_classes(std::size_t num_classes) {
  if (num_classes < 2) throw std::invalid_argument("network needs at least 2 classes");
}

}  // namespace

NetworkSpec build_scnn(std::size_t num_classes, std::size_t input_channels) {
  check_classes(num_classes);
  if (input_channels == 0) throw std::invalid_argument("input channels must be >= 1");
  NetworkSpec spec;
  spec.input = {kScnnInputSide, kScnnInputSide, input_channels};
  spec.num_classes = num_classes;

  std::size_t pool = 0;
  for (std::size_t stage = 1; stage <= kScnnConvLayers; ++stage) {
    add_stage(spec, stage, kScnnChannels[stage - 1]);
    if (stage <= 6 || stage == 11) {
      spec.layers.push_back(LayerSpec::maxpool("P" + std::to_string(++pool), 2, 2, 0));
    } else if (stage == 14) {
      // A 2x2 map only stays 2x2 through a 2x2/2 pool with one cell of padding.
      spec.layers.push_back(LayerSpec::maxpool("P" + std::to_string(++pool), 2, 2, 1));
    }
  }
  spec.layers.push_back(LayerSpec::fully_connected("FC1", 2048));
  spec.layers.push_back(LayerSpec::fully_connected("FC2", num_classes));
  spec.layers.push_back(LayerSpec::softmax_xent("xent", num_classes));
  spec.validate();
  return spec;
}

NetworkSpec build_compact_scnn(std::size_t num_classes, std::size_t input_side,
                               std::size_t input_channels, std::size_t hidden_units) {
  check_classes(num_classes);
  if (input_side == 0 || input_side % 16 != 0) {
    throw std::invalid_argument("compact network input side must be a positive multiple of 16");
  }
  if (input_channels == 0 || hidden_units == 0) {
    throw std::invalid_argument("input channels and hidden units must be >= 1");
  }
  NetworkSpec spec;
  spec.input = {input_side, input_side, input_channels};
  spec.num_classes = num_classes;
  const std::size_t channels[] = {8, 16, 32, 64};
  for (std::size_t stage = 1; stage <= 4; ++stage) {
    add_stage(spec, stage, channels[stage - 1]);
    spec.layers.push_back(LayerSpec::maxpool("P" + std::to_string(stage), 2, 2, 0));
  }
  spec.layers.push_back(LayerSpec::fully_connected("FC1", hidden_units));
  spec.layers.push_back(LayerSpec::fully_connected("FC2", num_classes));
  spec.layers.push_back(LayerSpec::softmax_xent("xent", num_classes));
  spec.validate();
  return spec;
}

ParameterCount parameter_count(const NetworkSpec& spec) {
  const auto shapes = spec.output_shapes();
  ParameterCount count;
  std::optional<std::size_t> first_fc_channels;
  std::optional<std::size_t> previous_fc_units;

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const nn::FeatureShape in = i == 0 ? spec.input : shapes[i - 1];
    LayerParameterRow row{l.name, l.kind, 0, std::nullopt};
    switch (l.kind) {
      case LayerKind::Conv:
        row.standard = l.kernel_h * l.kernel_w * in.channels * l.units + l.units;
        row.paper_style = l.kernel_h * l.kernel_w * l.units + l.units;
        break;
      case LayerKind::BatchNorm:
        row.standard = 2 * in.channels;
        break;
      case LayerKind::FullyConnected:
        row.standard = (in.count() + 1) * l.units;
        if (!first_fc_channels) {
          first_fc_channels = in.channels;
          row.paper_style = in.count();
        } else {
          row.paper_style = *first_fc_channels * *previous_fc_units;
        }
        previous_fc_units = l.units;
        break;
      default:
        break;
    }
    count.standard += row.standard;
    count.paper_style += row.paper_style.value_or(0);
    count.rows.push_back(std::move(row));
  }
  return count;
}

}  // namespace scnn
