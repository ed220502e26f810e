#include "scnn/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

namespace scnn::io {
namespace fs = std::filesystem;
namespace {

struct Raster {
  char magic = 0;  // '5' or '6'
  int width = 0;
  int height = 0;
  std::vector<unsigned char> bytes;
};

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw FormatError(path.string() + ": " + what);
}

Raster read_raster(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  std::size_t pos = 0;

  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(data[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* field) {
    skip_space();
    long v = 0;
    std::size_t digits = 0;
    while (pos < data.size() && std::isdigit(data[pos])) {
      v = v * 10 + (data[pos++] - '0');
      if (v > 1'000'000) fail(path, std::string("implausible ") + field);
      ++digits;
    }
    if (digits == 0) fail(path, std::string("missing ") + field);
    return static_cast<int>(v);
  };

  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6')) {
    fail(path, "not a binary PGM/PPM (P5/P6)");
  }
  Raster r;
  r.magic = static_cast<char>(data[1]);
  pos = 2;
  r.width = read_int("width");
  r.height = read_int("height");
  const int maxval = read_int("maxval");
  if (r.width <= 0 || r.height <= 0) fail(path, "zero image dimension");
  if (maxval != 255) fail(path, "unsupported maxval " + std::to_string(maxval) + " (need 255)");
  if (pos >= data.size() || !std::isspace(data[pos])) fail(path, "malformed header");
  ++pos;
  const std::size_t need =
      static_cast<std::size_t>(r.width) * r.height * (r.magic == '6' ? 3 : 1);
  if (data.size() - pos < need) fail(path, "truncated pixel data");
  r.bytes.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                 data.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return r;
}

void write_raster(const fs::path& path, char magic, int w, int h,
                  const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << 'P' << magic << '\n' << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

bool is_pnm(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm";
}

}  // namespace

imaging::RgbImage read_pnm(const fs::path& path) {
  const Raster r = read_raster(path);
  imaging::RgbImage img(r.width, r.height);
  auto& px = img.pixels();
  if (r.magic == '6') {
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = r.bytes[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < r.bytes.size(); ++i) {
      px[3 * i] = px[3 * i + 1] = px[3 * i + 2] = r.bytes[i] / 255.0;
    }
  }
  return img;
}

imaging::GrayImage read_pgm(const fs::path& path) {
  const Raster r = read_raster(path);
  if (r.magic != '5') fail(path, "expected a P5 PGM");
  imaging::GrayImage img(r.width, r.height);
  for (std::size_t i = 0; i < r.bytes.size(); ++i) img.pixels()[i] = r.bytes[i] / 255.0;
  return img;
}

void write_ppm(const fs::path& path, const imaging::RgbImage& img) {
  std::vector<unsigned char> bytes(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(), to_byte);
  write_raster(path, '6', img.width(), img.height(), bytes);
}

void write_pgm(const fs::path& path, const imaging::GrayImage& img) {
  std::vector<unsigned char> bytes(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(), to_byte);
  write_raster(path, '5', img.width(), img.height(), bytes);
}

api::FrameSequence load_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_pnm(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) throw FormatError(dir.string() + ": no .pgm/.ppm frames");
  std::sort(files.begin(), files.end());
  std::vector<imaging::RgbImage> frames;
  frames.reserve(files.size());
  for (const fs::path& f : files) {
    frames.push_back(read_pnm(f));
    if (!frames.back().same_size(frames.front())) {
      fail(f, "frame size differs from " + files.front().filename().string());
    }
  }
  return api::FrameSequence(std::move(frames));
}

void save_frames(const fs::path& dir, const api::FrameSequence& seq) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.ppm", i);
    write_ppm(dir / name, seq[i]);
  }
}

imaging::BinaryImage load_binary_pgm(const fs::path& path) {
  const Raster r = read_raster(path);
  if (r.magic != '5') fail(path, "expected a P5 PGM");
  imaging::BinaryImage img(r.width, r.height);
  for (std::size_t i = 0; i < r.bytes.size(); ++i) {
    if (r.bytes[i] != 0 && r.bytes[i] != 255) {
      fail(path, "byte " + std::to_string(r.bytes[i]) + " is not 0 or 255");
    }
    img.pixels()[i] = r.bytes[i] ? 1 : 0;
  }
  return img;
}

void save_binary_pgm(const fs::path& path, const imaging::BinaryImage& img) {
  std::vector<unsigned char> bytes(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(),
                 [](std::uint8_t v) -> unsigned char { return v ? 255 : 0; });
  write_raster(path, '5', img.width(), img.height(), bytes);
}

void save_api(const fs::path& path, const api::ActionPatternImage& a) {
  if (a.pixels.width() != api::kApiSide || a.pixels.height() != api::kApiSide) {
    throw std::invalid_argument("action pattern image must be 256x256");
  }
  save_binary_pgm(path, a.pixels);
}

api::ActionPatternImage load_api(const fs::path& path) {
  imaging::BinaryImage img = load_binary_pgm(path);
  if (img.width() != api::kApiSide || img.height() != api::kApiSide) {
    fail(path, "action pattern image is " + std::to_string(img.width()) + "x" +
                   std::to_string(img.height()) + ", expected 256x256");
  }
  return {std::move(img), std::nullopt};
}

}  // namespace scnn::io
