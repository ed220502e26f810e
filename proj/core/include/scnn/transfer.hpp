#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/network.hpp"
#include "scnn/training.hpp"

namespace scnn::transfer {

struct TransferPlan {
  /// Old labels followed by the new ones, e.g. the five actions plus "falling".
  std::vector<std::string> new_labels;
  double old_data_fraction = 0.20;
  std::size_t new_class_api_count = 100;
  std::uint64_t seed = 0;

  void validate(const std::vector<std::string>& old_labels) const;
};

/// Copies every layer before the last fully-connected layer bit-exact
/// (including batchnorm running statistics), re-initializes the final
/// fully-connected layer for `new_classes` outputs from `seed`, and rebuilds
/// the softmax-xent head. All velocities start at zero.
template <typename T>
nn::Network<T> transplant(const nn::Network<T>& source, std::size_t new_classes,
                          std::uint64_t seed);

/// Seeded sample of ceil(fraction * n_c) images from each old class c, plus
/// up to `new_class_api_count` new-class images (a seeded subset when more are
/// supplied), labelled old_by_class.size().
std::vector<LabeledImage> build_transfer_dataset(
    const std::vector<std::vector<imaging::BinaryImage>>& old_by_class,
    const std::vector<imaging::BinaryImage>& new_class, const TransferPlan& plan);

template <typename T>
struct TransferOutcome {
  nn::Network<T> network;
  std::vector<LabeledImage> dataset;
  train::TrainResult training;
};

/// Transplant, build the mixed dataset, then train with `cfg` unchanged.
template <typename T>
TransferOutcome<T> transfer_train(const nn::Network<T>& source,
                                  const std::vector<std::string>& old_labels,
                                  const std::vector<std::vector<imaging::BinaryImage>>& old_by_class,
                                  const std::vector<imaging::BinaryImage>& new_class,
                                  const TransferPlan& plan, const train::TrainConfig& cfg,
                                  const train::LogSink& on_log = {});

}  // namespace scnn::transfer
