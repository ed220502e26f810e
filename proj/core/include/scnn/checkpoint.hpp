#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scnn/netpbm.hpp"
#include "scnn/network.hpp"

namespace scnn::io {

inline constexpr char kCheckpointMagic[4] = {'S', 'C', 'N', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Velocities are not stored; a loaded network resumes with zero momentum.
struct Checkpoint {
  nn::NetworkSpec spec;
  std::vector<std::string> labels;
  nn::ParamStore<float> params;

  nn::Network<float> network() const { return nn::Network<float>(spec, params); }
};

// Layout, all integers little-endian:
//   "SCNN" u32 version
//   u32 in_h, in_w, in_c, num_classes
//   u32 n_layers; per layer: u8 kind, u32 kernel_h, kernel_w, stride, padding, units, str name
//   u32 n_labels; str label...
//   per layer: u32 n_tensors; per tensor: u8 role, u32 rank, u32 dims[rank], f32 values
// where str is u32 byte length followed by UTF-8 bytes.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
Checkpoint make_checkpoint(const nn::Network<T>& network, std::vector<std::string> labels) {
  return {network.spec(), std::move(labels), network.params().template cast<float>()};
}

}  // namespace scnn::io
