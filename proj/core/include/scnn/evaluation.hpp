#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/imaging.hpp"
#include "scnn/network.hpp"

namespace scnn::eval {

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

/// Infer-mode softmax; ties resolve to the lowest class index.
template <typename T>
Prediction predict(const nn::Network<T>& network, const imaging::BinaryImage& image);

template <typename T>
std::vector<Prediction> predict_all(const nn::Network<T>& network,
                                    std::span<const imaging::BinaryImage* const> images,
                                    std::size_t batch_size = 32);

/// counts[predicted][target]: rows are output classes, columns target classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);
  ConfusionMatrix(std::vector<std::string> labels, std::vector<std::vector<std::size_t>> counts);

  void add(std::size_t predicted, std::size_t target, std::size_t n = 1);
  void merge(const ConfusionMatrix& other);

  std::size_t classes() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t count(std::size_t predicted, std::size_t target) const {
    return counts_.at(predicted).at(target);
  }
  std::size_t row_total(std::size_t predicted) const;
  std::size_t column_total(std::size_t target) const;
  std::size_t total() const;
  std::size_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::size_t>> counts_;
};

template <typename T>
ConfusionMatrix confusion(const nn::Network<T>& network, std::span<const LabeledImage> test_set,
                          std::vector<std::string> labels, std::size_t batch_size = 32);

struct ClassMetrics {
  double precision = 0.0;  // NaN when nothing was predicted as this class
  double recall = 0.0;     // NaN when the class has no test samples
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::optional<std::size_t> positive_class;
  /// One-vs-rest TP/(TP+FN) and TN/(TN+FP) for the positive class.
  double sensitivity = 0.0;
  double specificity = 0.0;
};

Metrics metrics(const ConfusionMatrix& cm, std::optional<std::size_t> positive_class = std::nullopt);

enum class TableStyle { Aligned, Tabs };

/// Each cell "count pct%", a per-row precision column, a per-column recall
/// row and overall accuracy in the corner. Tabs style separates cells with
/// single tabs so rows can be diffed against published tables.
std::string render_confusion_text(const ConfusionMatrix& cm, TableStyle style = TableStyle::Aligned);
std::string render_metrics_text(const ConfusionMatrix& cm, const Metrics& m);
/// Tab-separated records: labels, one `cell` line per matrix entry, metrics.
std::string render_records(const ConfusionMatrix& cm, const Metrics& m);

/// Tiles equal-sized images row-major with one-pixel black separators.
imaging::GrayImage tile_grid(const std::vector<imaging::GrayImage>& tiles, std::size_t columns);

/// Every (in, out) kernel slice of a convolution layer, each min-max
/// normalized (a flat kernel renders as 0.5). One row per output channel,
/// one column per input channel; single-input layers wrap into a square grid.
template <typename T>
imaging::GrayImage dump_filters(const nn::Network<T>& network, std::string_view layer,
                                std::size_t* tile_count = nullptr);

/// Per-channel activation maps. A convolution name selects the output of the
/// ReLU that follows it; any other name selects that layer's output.
template <typename T>
imaging::GrayImage dump_activations(const nn::Network<T>& network, const imaging::BinaryImage& input,
                                    std::string_view layer, std::size_t* tile_count = nullptr);

}  // namespace scnn::eval
