#include "scnn/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace scnn::transfer {

void TransferPlan::validate(const std::vector<std::string>& old_labels) const {
  if (new_labels.size() <= old_labels.size() ||
      !std::equal(old_labels.begin(), old_labels.end(), new_labels.begin())) {
    throw std::invalid_argument("new label list must extend the old label list");
  }
  if (!(old_data_fraction > 0.0 && old_data_fraction <= 1.0)) {
    throw std::invalid_argument("old data fraction must be in (0,1]");
  }
  if (new_class_api_count == 0) throw std::invalid_argument("new class needs at least one image");
}

template <typename T>
nn::Network<T> transplant(const nn::Network<T>& source, std::size_t new_classes,
                          std::uint64_t seed) {
  const nn::NetworkSpec& old_spec = source.spec();
  if (new_classes <= old_spec.num_classes) {
    throw std::invalid_argument("transplant needs more classes than the source (" +
                                std::to_string(old_spec.num_classes) + ")");
  }
  std::size_t head = old_spec.layers.size();
  for (std::size_t i = old_spec.layers.size(); i-- > 0;) {
    if (old_spec.layers[i].kind == nn::LayerKind::FullyConnected) {
      head = i;
      break;
    }
  }
  if (head == old_spec.layers.size()) {
    throw std::invalid_argument("source network has no fully-connected classifier layer");
  }

  nn::NetworkSpec spec = old_spec;
  spec.num_classes = new_classes;
  spec.layers[head].units = new_classes;
  spec.layers.back().units = new_classes;
  spec.validate();

  nn::ParamStore<T> params;
  params.layers.resize(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (i == head) {
      params.layers[i] = nn::init_layer_params<T>(spec, i, seed);
    } else {
      for (const nn::Parameter<T>& p : source.params().layers[i]) {
        params.layers[i].push_back({p.role, p.value, nn::Tensor<T>()});
      }
    }
  }
  return nn::Network<T>(std::move(spec), std::move(params));
}

std::vector<LabeledImage> build_transfer_dataset(
    const std::vector<std::vector<imaging::BinaryImage>>& old_by_class,
    const std::vector<imaging::BinaryImage>& new_class, const TransferPlan& plan) {
  if (!(plan.old_data_fraction > 0.0 && plan.old_data_fraction <= 1.0)) {
    throw std::invalid_argument("old data fraction must be in (0,1]");
  }
  if (new_class.empty()) throw std::invalid_argument("no images for the new class");

  std::mt19937_64 rng(plan.seed);
  std::vector<LabeledImage> out;
  auto take = [&](const std::vector<imaging::BinaryImage>& pool, std::size_t count, int label) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < count; ++k) out.push_back({pool[idx[k]], label});
  };

  for (std::size_t c = 0; c < old_by_class.size(); ++c) {
    const auto& pool = old_by_class[c];
    // Guard against 0.2 * 100 landing a hair above 20.
    const double want = plan.old_data_fraction * static_cast<double>(pool.size());
    const auto count =
        std::min(pool.size(), static_cast<std::size_t>(std::ceil(want - 1e-9)));
    take(pool, count, static_cast<int>(c));
  }
  take(new_class, std::min(plan.new_class_api_count, new_class.size()),
       static_cast<int>(old_by_class.size()));
  return out;
}

template <typename T>
TransferOutcome<T> transfer_train(const nn::Network<T>& source,
                                  const std::vector<std::string>& old_labels,
                                  const std::vector<std::vector<imaging::BinaryImage>>& old_by_class,
                                  const std::vector<imaging::BinaryImage>& new_class,
                                  const TransferPlan& plan, const train::TrainConfig& cfg,
                                  const train::LogSink& on_log) {
  plan.validate(old_labels);
  if (old_labels.size() != source.num_classes() || old_by_class.size() != old_labels.size()) {
    throw std::invalid_argument("old labels and old data must match the source network classes");
  }
  if (plan.new_labels.size() != old_labels.size() + 1) {
    throw std::invalid_argument("transfer_train adds exactly one class");
  }
  TransferOutcome<T> outcome{transplant(source, plan.new_labels.size(), plan.seed),
                             build_transfer_dataset(old_by_class, new_class, plan),
                             {}};
  outcome.training = train::train(outcome.network, outcome.dataset, cfg, on_log);
  return outcome;
}

template nn::Network<float> transplant(const nn::Network<float>&, std::size_t, std::uint64_t);
template nn::Network<double> transplant(const nn::Network<double>&, std::size_t, std::uint64_t);
template TransferOutcome<float> transfer_train(
    const nn::Network<float>&, const std::vector<std::string>&,
    const std::vector<std::vector<imaging::BinaryImage>>&, const std::vector<imaging::BinaryImage>&,
    const TransferPlan&, const train::TrainConfig&, const train::LogSink&);
template TransferOutcome<double> transfer_train(
    const nn::Network<double>&, const std::vector<std::string>&,
    const std::vector<std::vector<imaging::BinaryImage>>&, const std::vector<imaging::BinaryImage>&,
    const TransferPlan&, const train::TrainConfig&, const train::LogSink&);

}  // namespace scnn::transfer
