#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scnn/network.hpp"

namespace scnn {

inline constexpr std::size_t kScnnInputSide = 256;
inline constexpr std::size_t kScnnConvLayers = 14;

/// Output channels of convolution stages C1..C14.
inline constexpr std::size_t kScnnChannels[kScnnConvLayers] = {
    8, 16, 32, 64, 128, 256, 512, 1024, 1024, 1024, 1024, 2048, 2048, 2048};

/// The 14-stage series CNN: C1-C6 each followed by a 2x2/2 pool, C7-C11
/// unpooled then pool-7, C12-C14 then a padded pool-8, FC-1 (2048 units),
/// FC-2 (num_classes) and the softmax-xent head.
///
/// Layer names: C<i>, B<i>, R<i> for conv/batchnorm/relu of stage i,
/// P<j> for pools, FC1, FC2, and "xent".
nn::NetworkSpec build_scnn(std::size_t num_classes, std::size_t input_channels = 1);

/// Depth-reduced variant with the same layer kinds for desk-scale runs:
/// four conv+BN+ReLU+pool stages (8,16,32,64 channels), FC1 with
/// `hidden_units`, FC2 with num_classes. `input_side` must be divisible by 16.
nn::NetworkSpec build_compact_scnn(std::size_t num_classes, std::size_t input_side = 64,
                                   std::size_t input_channels = 1, std::size_t hidden_units = 64);

struct LayerParameterRow {
  std::string name;
  nn::LayerKind kind;
  std::size_t standard = 0;
  /// Figure under the published table's convention; empty for layers the
  /// table does not list (batchnorm, relu, pooling, head).
  std::optional<std::size_t> paper_style;
};

struct ParameterCount {
  /// Every learnable scalar: conv kh*kw*cin*cout + cout, batchnorm 2c,
  /// fc (in+1)*out.
  std::size_t standard = 0;
  /// Table convention: conv kh*kw*cout + cout; the first fc reports its
  /// flattened input width, later fc layers report the channel depth
  /// entering the first fc times the previous fc's units.
  std::size_t paper_style = 0;
  std::vector<LayerParameterRow> rows;
};

ParameterCount parameter_count(const nn::NetworkSpec& spec);

}  // namespace scnn
