#include "scnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>

namespace scnn::io {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint64_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
      throw std::length_error("checkpoint field exceeds 32 bits");
    }
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<char>((v >> s) & 0xff));
  }
  void str(const std::string& s) {
    u32(s.size());
    out_ += s;
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int s = 0; s < 32; s += 8) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_++])) << s;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool at_end() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint is truncated");
  }

  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.spec.validate();
  if (ckpt.labels.size() != ckpt.spec.num_classes) {
    throw std::invalid_argument("checkpoint needs one label per class");
  }
  if (ckpt.params.layers.size() != ckpt.spec.layers.size()) {
    throw std::invalid_argument("checkpoint parameters do not match the spec");
  }
  Writer w;
  for (char c : kCheckpointMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.u32(ckpt.spec.input.height);
  w.u32(ckpt.spec.input.width);
  w.u32(ckpt.spec.input.channels);
  w.u32(ckpt.spec.num_classes);
  w.u32(ckpt.spec.layers.size());
  for (const nn::LayerSpec& l : ckpt.spec.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(l.kernel_h);
    w.u32(l.kernel_w);
    w.u32(l.stride);
    w.u32(l.padding);
    w.u32(l.units);
    w.str(l.name);
  }
  w.u32(ckpt.labels.size());
  for (const std::string& s : ckpt.labels) w.str(s);
  for (const auto& layer : ckpt.params.layers) {
    w.u32(layer.size());
    for (const nn::Parameter<float>& p : layer) {
      w.u8(static_cast<std::uint8_t>(p.role));
      w.u32(p.value.rank());
      for (std::size_t d : p.value.shape()) w.u32(d);
      for (float v : p.value.values()) w.f32(v);
    }
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("not an SCNN checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.spec.input.height = r.u32();
  ck.spec.input.width = r.u32();
  ck.spec.input.channels = r.u32();
  ck.spec.num_classes = r.u32();
  const std::uint32_t n_layers = r.u32();
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    nn::LayerSpec l;
    const std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 6) throw FormatError("unknown layer kind " + std::to_string(kind));
    l.kind = static_cast<nn::LayerKind>(kind);
    l.kernel_h = r.u32();
    l.kernel_w = r.u32();
    l.stride = r.u32();
    l.padding = r.u32();
    l.units = r.u32();
    l.name = r.str();
    ck.spec.layers.push_back(std::move(l));
  }
  try {
    ck.spec.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("checkpoint spec is invalid: ") + e.what());
  }
  const std::uint32_t n_labels = r.u32();
  if (n_labels != ck.spec.num_classes) throw FormatError("checkpoint label count does not match classes");
  for (std::uint32_t i = 0; i < n_labels; ++i) ck.labels.push_back(r.str());

  ck.params.layers.resize(n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto layout = nn::parameter_layout(ck.spec, i);
    const std::uint32_t n_tensors = r.u32();
    if (n_tensors != layout.size()) {
      throw FormatError("layer " + ck.spec.layers[i].name + ": wrong tensor count");
    }
    for (const auto& [role, shape] : layout) {
      const std::uint8_t stored_role = r.u8();
      nn::Shape stored(r.u32());
      if (stored.size() > 8) throw FormatError("implausible tensor rank");
      for (std::size_t& d : stored) d = r.u32();
      if (stored_role != static_cast<std::uint8_t>(role) || stored != shape) {
        throw FormatError("layer " + ck.spec.layers[i].name + ": tensor " + nn::to_string(stored) +
                          " does not match expected " + nn::to_string(shape));
      }
      if (r.remaining() / 4 < nn::element_count(shape)) throw FormatError("checkpoint is truncated");
      nn::Tensor<float> t(shape);
      for (float& v : t.values()) v = r.f32();
      ck.params.layers[i].push_back({role, std::move(t), nn::Tensor<float>()});
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write checkpoint");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": checkpoint write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open checkpoint");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace scnn::io
