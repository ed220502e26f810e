#include "scnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace scnn::eval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

std::string percent(double fraction) {
  if (std::isnan(fraction)) return "n/a";
  if (fraction == 1.0) return "100%";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

std::string fixed(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

imaging::GrayImage normalized_tile(const std::vector<double>& values, int w, int h) {
  imaging::GrayImage tile(w, h);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    tile.pixels()[i] = range > 0.0 ? (values[i] - *lo) / range : 0.5;
  }
  return tile;
}

std::size_t square_columns(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
}

}  // namespace

template <typename T>
std::vector<Prediction> predict_all(const nn::Network<T>& network,
                                    std::span<const imaging::BinaryImage* const> images,
                                    std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  std::vector<Prediction> out;
  out.reserve(images.size());
  const std::size_t k = network.num_classes();
  for (std::size_t start = 0; start < images.size(); start += batch_size) {
    const auto chunk = images.subspan(start, std::min(batch_size, images.size() - start));
    const nn::Tensor<T> probs =
        nn::softmax(network.infer(make_batch<T>(chunk, network.spec().input.channels)));
    for (std::size_t r = 0; r < chunk.size(); ++r) {
      Prediction p;
      p.probabilities.resize(k);
      for (std::size_t j = 0; j < k; ++j) p.probabilities[j] = probs[r * k + j];
      p.label = static_cast<std::size_t>(
          std::max_element(p.probabilities.begin(), p.probabilities.end()) -
          p.probabilities.begin());
      out.push_back(std::move(p));
    }
  }
  return out;
}

template <typename T>
Prediction predict(const nn::Network<T>& network, const imaging::BinaryImage& image) {
  const imaging::BinaryImage* one[] = {&image};
  return predict_all(network, std::span<const imaging::BinaryImage* const>(one), 1).front();
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)),
      counts_(labels_.size(), std::vector<std::size_t>(labels_.size(), 0)) {
  if (labels_.empty()) throw std::invalid_argument("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels,
                                 std::vector<std::vector<std::size_t>> counts)
    : labels_(std::move(labels)), counts_(std::move(counts)) {
  if (labels_.empty() || counts_.size() != labels_.size()) {
    throw std::invalid_argument("confusion matrix must be square with one row per label");
  }
  for (const auto& row : counts_) {
    if (row.size() != labels_.size()) {
      throw std::invalid_argument("confusion matrix must be square with one row per label");
    }
  }
}

void ConfusionMatrix::add(std::size_t predicted, std::size_t target, std::size_t n) {
  if (predicted >= classes() || target >= classes()) {
    throw std::out_of_range("confusion matrix class index out of range");
  }
  counts_[predicted][target] += n;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.labels_ != labels_) throw std::invalid_argument("cannot merge matrices with different labels");
  for (std::size_t i = 0; i < classes(); ++i) {
    for (std::size_t j = 0; j < classes(); ++j) counts_[i][j] += other.counts_[i][j];
  }
}

std::size_t ConfusionMatrix::row_total(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t v : counts_.at(predicted)) s += v;
  return s;
}

std::size_t ConfusionMatrix::column_total(std::size_t target) const {
  std::size_t s = 0;
  for (const auto& row : counts_) s += row.at(target);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes(); ++i) s += row_total(i);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes(); ++i) s += counts_[i][i];
  return s;
}

template <typename T>
ConfusionMatrix confusion(const nn::Network<T>& network, std::span<const LabeledImage> test_set,
                          std::vector<std::string> labels, std::size_t batch_size) {
  if (labels.size() != network.num_classes()) {
    throw std::invalid_argument("label list does not match the network's class count");
  }
  ConfusionMatrix cm(std::move(labels));
  std::vector<const imaging::BinaryImage*> images;
  images.reserve(test_set.size());
  for (const LabeledImage& s : test_set) images.push_back(&s.image);
  const std::vector<Prediction> preds = predict_all(network, images, batch_size);
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    if (test_set[i].label < 0) throw std::invalid_argument("negative test label");
    cm.add(preds[i].label, static_cast<std::size_t>(test_set[i].label));
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm, std::optional<std::size_t> positive_class) {
  Metrics m;
  m.accuracy = ratio(cm.trace(), cm.total());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    m.per_class.push_back({ratio(cm.count(c, c), cm.row_total(c)),
                           ratio(cm.count(c, c), cm.column_total(c))});
  }
  if (positive_class) {
    const std::size_t p = *positive_class;
    if (p >= cm.classes()) throw std::out_of_range("positive class index out of range");
    const std::size_t tp = cm.count(p, p);
    const std::size_t fn = cm.column_total(p) - tp;
    const std::size_t fp = cm.row_total(p) - tp;
    const std::size_t tn = cm.total() - tp - fn - fp;
    m.positive_class = p;
    m.sensitivity = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
  }
  return m;
}

std::string render_confusion_text(const ConfusionMatrix& cm, TableStyle style) {
  const std::size_t k = cm.classes();
  const double total = static_cast<double>(cm.total());
  std::vector<std::vector<std::string>> grid;

  std::vector<std::string> header{"Output Class"};
  for (const auto& l : cm.labels()) header.push_back(l);
  header.push_back("");
  grid.push_back(header);

  for (std::size_t r = 0; r < k; ++r) {
    std::vector<std::string> row{cm.labels()[r]};
    for (std::size_t c = 0; c < k; ++c) {
      row.push_back(std::to_string(cm.count(r, c)) + " " +
                    percent(total > 0 ? cm.count(r, c) / total : kNaN));
    }
    const double precision = ratio(cm.count(r, r), cm.row_total(r));
    row.push_back(percent(precision) + " " + percent(std::isnan(precision) ? kNaN : 1.0 - precision));
    grid.push_back(row);
  }

  std::vector<std::string> footer{""};
  for (std::size_t c = 0; c < k; ++c) {
    const double recall = ratio(cm.count(c, c), cm.column_total(c));
    footer.push_back(percent(recall) + " " + percent(std::isnan(recall) ? kNaN : 1.0 - recall));
  }
  const double acc = ratio(cm.trace(), cm.total());
  footer.push_back(percent(acc) + " " + percent(std::isnan(acc) ? kNaN : 1.0 - acc));
  grid.push_back(footer);

  std::vector<std::string> targets{""};
  for (const auto& l : cm.labels()) targets.push_back(l);
  targets.push_back("");
  grid.push_back(targets);
  grid.push_back({"", "Target Class"});

  std::ostringstream os;
  if (style == TableStyle::Tabs) {
    for (const auto& row : grid) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "\t" : "") << row[c];
      os << '\n';
    }
    return os.str();
  }

  std::vector<std::size_t> widths(k + 2, 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(widths[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

std::string render_metrics_text(const ConfusionMatrix& cm, const Metrics& m) {
  std::ostringstream os;
  os << "accuracy: " << percent(m.accuracy) << " (" << cm.trace() << "/" << cm.total() << ")\n";
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    os << "  " << cm.labels()[c] << ": precision " << percent(m.per_class[c].precision)
       << ", recall " << percent(m.per_class[c].recall) << '\n';
  }
  if (m.positive_class) {
    os << "positive class " << cm.labels()[*m.positive_class] << ": sensitivity "
       << percent(m.sensitivity) << ", specificity " << percent(m.specificity) << '\n';
  }
  return os.str();
}

std::string render_records(const ConfusionMatrix& cm, const Metrics& m) {
  std::ostringstream os;
  os << "labels";
  for (const auto& l : cm.labels()) os << '\t' << l;
  os << '\n';
  for (std::size_t r = 0; r < cm.classes(); ++r) {
    for (std::size_t c = 0; c < cm.classes(); ++c) {
      os << "cell\t" << cm.labels()[r] << '\t' << cm.labels()[c] << '\t' << cm.count(r, c) << '\n';
    }
  }
  os << "accuracy\t" << fixed(m.accuracy) << '\n';
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    os << "class\t" << cm.labels()[c] << "\tprecision\t" << fixed(m.per_class[c].precision)
       << "\trecall\t" << fixed(m.per_class[c].recall) << '\n';
  }
  if (m.positive_class) {
    os << "positive\t" << cm.labels()[*m.positive_class] << "\tsensitivity\t"
       << fixed(m.sensitivity) << "\tspecificity\t" << fixed(m.specificity) << '\n';
  }
  return os.str();
}

imaging::GrayImage tile_grid(const std::vector<imaging::GrayImage>& tiles, std::size_t columns) {
  if (tiles.empty()) throw std::invalid_argument("tile_grid: no tiles");
  if (columns == 0) throw std::invalid_argument("tile_grid: columns must be >= 1");
  const int tw = tiles.front().width();
  const int th = tiles.front().height();
  const std::size_t cols = std::min(columns, tiles.size());
  const std::size_t rows = (tiles.size() + cols - 1) / cols;
  imaging::GrayImage grid(static_cast<int>(cols * tw + cols - 1),
                          static_cast<int>(rows * th + rows - 1), 0.0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (tiles[i].width() != tw || tiles[i].height() != th) {
      throw std::invalid_argument("tile_grid: tiles differ in size");
    }
    const int ox = static_cast<int>((i % cols) * (tw + 1));
    const int oy = static_cast<int>((i / cols) * (th + 1));
    for (int y = 0; y < th; ++y) {
      for (int x = 0; x < tw; ++x) grid.at(ox + x, oy + y) = tiles[i].at(x, y);
    }
  }
  return grid;
}

template <typename T>
imaging::GrayImage dump_filters(const nn::Network<T>& network, std::string_view layer,
                                std::size_t* tile_count) {
  const std::size_t idx = network.spec().index_of(layer);
  if (network.spec().layers[idx].kind != nn::LayerKind::Conv) {
    throw std::invalid_argument("dump_filters: layer '" + std::string(layer) + "' is not a convolution");
  }
  const nn::Tensor<T>& w = network.params().layers[idx][0].value;
  const std::size_t kh = w.dim(0), kw = w.dim(1), cin = w.dim(2), cout = w.dim(3);
  std::vector<imaging::GrayImage> tiles;
  tiles.reserve(cin * cout);
  std::vector<double> values(kh * kw);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t i = 0; i < cin; ++i) {
      for (std::size_t y = 0; y < kh; ++y) {
        for (std::size_t x = 0; x < kw; ++x) values[y * kw + x] = w[((y * kw + x) * cin + i) * cout + o];
      }
      tiles.push_back(normalized_tile(values, static_cast<int>(kw), static_cast<int>(kh)));
    }
  }
  if (tile_count) *tile_count = tiles.size();
  return tile_grid(tiles, cin == 1 ? square_columns(tiles.size()) : cin);
}

template <typename T>
imaging::GrayImage dump_activations(const nn::Network<T>& network, const imaging::BinaryImage& input,
                                    std::string_view layer, std::size_t* tile_count) {
  const nn::NetworkSpec& spec = network.spec();
  std::size_t idx = spec.index_of(layer);
  if (spec.layers[idx].kind == nn::LayerKind::Conv) {
    for (std::size_t j = idx + 1; j < spec.layers.size(); ++j) {
      const nn::LayerKind k = spec.layers[j].kind;
      if (k == nn::LayerKind::Relu) {
        idx = j;
        break;
      }
      if (k != nn::LayerKind::BatchNorm) break;
    }
  }
  const nn::Tensor<T> act = network.infer_to(make_batch<T>(input, spec.input.channels), idx);
  if (act.rank() != 4) throw std::invalid_argument("dump_activations: layer output is not a feature map");
  const std::size_t h = act.height(), w = act.width(), c = act.channels();
  std::vector<imaging::GrayImage> tiles;
  tiles.reserve(c);
  std::vector<double> values(h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) values[y * w + x] = act.at(0, y, x, ch);
    }
    tiles.push_back(normalized_tile(values, static_cast<int>(w), static_cast<int>(h)));
  }
  if (tile_count) *tile_count = tiles.size();
  return tile_grid(tiles, square_columns(tiles.size()));
}

#define SCNN_INSTANTIATE_EVAL(T)                                                                   \
  template Prediction predict(const nn::Network<T>&, const imaging::BinaryImage&);                 \
  template std::vector<Prediction> predict_all(const nn::Network<T>&,                              \
                                               std::span<const imaging::BinaryImage* const>,       \
                                               std::size_t);                                       \
  template ConfusionMatrix confusion(const nn::Network<T>&, std::span<const LabeledImage>,         \
                                     std::vector<std::string>, std::size_t);                       \
  template imaging::GrayImage dump_filters(const nn::Network<T>&, std::string_view, std::size_t*); \
  template imaging::GrayImage dump_activations(const nn::Network<T>&, const imaging::BinaryImage&, \
                                               std::string_view, std::size_t*);

SCNN_INSTANTIATE_EVAL(float)
SCNN_INSTANTIATE_EVAL(double)

#undef SCNN_INSTANTIATE_EVAL

}  // namespace scnn::eval
