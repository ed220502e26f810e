#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "scnn/api_builder.hpp"
#include "scnn/imaging.hpp"

namespace scnn::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary P5 (gray, replicated to three channels) or P6, maxval 255.
/// Samples map to [0,1] by /255.
imaging::RgbImage read_pnm(const std::filesystem::path& path);
/// Same, P5 only, values in [0,1].
imaging::GrayImage read_pgm(const std::filesystem::path& path);

/// Values are clamped to [0,1] and rounded to the nearest byte.
void write_ppm(const std::filesystem::path& path, const imaging::RgbImage& img);
void write_pgm(const std::filesystem::path& path, const imaging::GrayImage& img);

/// Lexicographically sorted .pgm/.ppm files of a directory.
api::FrameSequence load_frames(const std::filesystem::path& dir);
void save_frames(const std::filesystem::path& dir, const api::FrameSequence& seq);

/// 256x256 P5 with bytes 0 and 255 only.
void save_api(const std::filesystem::path& path, const api::ActionPatternImage& api);
api::ActionPatternImage load_api(const std::filesystem::path& path);

/// Any-size 0/255 P5, for the desk-scale datasets.
imaging::BinaryImage load_binary_pgm(const std::filesystem::path& path);
void save_binary_pgm(const std::filesystem::path& path, const imaging::BinaryImage& img);

}  // namespace scnn::io
