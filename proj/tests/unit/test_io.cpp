#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "scnn/architecture.hpp"
#include "scnn/checkpoint.hpp"
#include "scnn/manifest.hpp"
#include "scnn/netpbm.hpp"
#include "scnn/synth.hpp"

namespace fs = std::filesystem;
using namespace scnn;
using namespace scnn::io;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("scnn_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
  }

  fs::path dir_;
};

std::string pnm(char kind, int w, int h, const std::string& pixels, int maxval = 255) {
  return std::string("P") + kind + "\n# made by a test\n" + std::to_string(w) + " " + std::to_string(h) +
         "\n" + std::to_string(maxval) + "\n" + pixels;
}

using Netpbm = TempDir;
using Manifests = TempDir;
using Checkpoints = TempDir;

}  // namespace

TEST_F(Netpbm, ByteValuesMapToUnitRange) {
  write_bytes(dir_ / "a.pgm", pnm('5', 2, 1, std::string("\x80\xff", 2)));
  const imaging::GrayImage g = read_pgm(dir_ / "a.pgm");
  EXPECT_DOUBLE_EQ(g.at(0, 0), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(g.at(1, 0), 1.0);
  const imaging::RgbImage rgb = read_pnm(dir_ / "a.pgm");
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(rgb.at(0, 0, c), 128.0 / 255.0);
}

TEST_F(Netpbm, PpmRoundTrip) {
  imaging::RgbImage img(5, 3);
  std::mt19937_64 rng(1);
  for (double& v : img.pixels()) v = std::uniform_int_distribution<int>(0, 255)(rng) / 255.0;
  write_ppm(dir_ / "x.ppm", img);
  const imaging::RgbImage back = read_pnm(dir_ / "x.ppm");
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.pixels()[i], img.pixels()[i], 1e-12);
}

TEST_F(Netpbm, RejectsBadHeaders) {
  write_bytes(dir_ / "m.pgm", pnm('5', 1, 1, "\x01", 65535));
  EXPECT_THROW(read_pgm(dir_ / "m.pgm"), FormatError);
  write_bytes(dir_ / "t.pgm", pnm('5', 4, 4, "ab"));
  EXPECT_THROW(read_pgm(dir_ / "t.pgm"), FormatError);
  write_bytes(dir_ / "a.pgm", "P2\n1 1\n255\n7\n");
  EXPECT_THROW(read_pgm(dir_ / "a.pgm"), FormatError);
  write_bytes(dir_ / "c.ppm", pnm('6', 1, 1, "abc"));
  EXPECT_THROW(read_pgm(dir_ / "c.ppm"), FormatError);
  EXPECT_THROW(read_pgm(dir_ / "missing.pgm"), FormatError);
}

TEST_F(Netpbm, FrameDirectoryLoadsInNameOrder) {
  for (int i = 9; i >= 0; --i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%02d.ppm", i);
    write_bytes(dir_ / name, pnm('6', 3, 2, std::string(18, static_cast<char>(i * 20))));
  }
  write_bytes(dir_ / "notes.txt", "ignored");
  const api::FrameSequence seq = load_frames(dir_);
  ASSERT_EQ(seq.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(seq[i].at(0, 0, 0), i * 20 / 255.0);
}

TEST_F(Netpbm, FrameDirectoryErrors) {
  EXPECT_THROW(load_frames(dir_), FormatError);
  EXPECT_THROW(load_frames(dir_ / "nope"), FormatError);
  write_bytes(dir_ / "a.pgm", pnm('5', 2, 2, std::string(4, 'x')));
  write_bytes(dir_ / "b.pgm", pnm('5', 3, 2, std::string(6, 'x')));
  EXPECT_THROW(load_frames(dir_), FormatError);
}

TEST_F(Netpbm, SavedFramesReloadExactly) {
  const api::FrameSequence seq = synth::synth_video(synth::VideoKind::WaveBar, 4, 3);
  save_frames(dir_, seq);
  const api::FrameSequence back = load_frames(dir_);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_TRUE(fs::exists(dir_ / "frame_00000.ppm"));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t p = 0; p < seq[i].size(); ++p)
      ASSERT_NEAR(back[i].pixels()[p], seq[i].pixels()[p], 0.5 / 255.0 + 1e-12);
}

TEST_F(Netpbm, ApiRoundTripAndStrictSize) {
  api::ActionPatternImage a{imaging::BinaryImage(256, 256, 0)};
  a.pixels.at(10, 20) = 1;
  a.pixels.at(255, 255) = 1;
  save_api(dir_ / "a.pgm", a);
  EXPECT_EQ(load_api(dir_ / "a.pgm"), a);

  save_binary_pgm(dir_ / "big.pgm", imaging::BinaryImage(300, 300, 0));
  EXPECT_THROW(load_api(dir_ / "big.pgm"), FormatError);
  EXPECT_NO_THROW(load_binary_pgm(dir_ / "big.pgm"));

  write_bytes(dir_ / "gray.pgm", pnm('5', 2, 1, std::string("\x00\x80", 2)));
  EXPECT_THROW(load_binary_pgm(dir_ / "gray.pgm"), FormatError);
}

TEST_F(Manifests, ParseResolveAndRoundTrip) {
  fs::create_directories(dir_ / "imgs");
  write_bytes(dir_ / "list.tsv",
              "# header comment\n"
              "imgs/a.pgm\twalk\n"
              "\n"
              "imgs/b.pgm\trun\n"
              "imgs/../imgs/c.pgm\twalk\n");
  const Manifest m = read_manifest(dir_ / "list.tsv");
  EXPECT_EQ(m.classes, (std::vector<std::string>{"walk", "run"}));
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.records[1].class_index, 1);
  EXPECT_EQ(m.records[2].path, (dir_ / "imgs" / "c.pgm").lexically_normal());

  const Manifest fixed = read_manifest(dir_ / "list.tsv", {"run", "walk", "jump"});
  EXPECT_EQ(fixed.records[0].class_index, 1);

  write_manifest(dir_ / "copy.tsv", m.records);
  const Manifest again = read_manifest(dir_ / "copy.tsv");
  ASSERT_EQ(again.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again.records[i].path, m.records[i].path);
    EXPECT_EQ(again.records[i].label, m.records[i].label);
  }
}

TEST_F(Manifests, Errors) {
  write_bytes(dir_ / "dup.tsv", "a.pgm\tx\na.pgm\ty\n");
  EXPECT_THROW(read_manifest(dir_ / "dup.tsv"), std::runtime_error);
  write_bytes(dir_ / "lab.tsv", "a.pgm\tx\nb.pgm\tq\n");
  EXPECT_THROW(read_manifest(dir_ / "lab.tsv", {"x"}), std::runtime_error);
  write_bytes(dir_ / "empty.tsv", "# nothing\n\n");
  EXPECT_THROW(read_manifest(dir_ / "empty.tsv"), std::runtime_error);
  write_bytes(dir_ / "notab.tsv", "a.pgm x\n");
  EXPECT_THROW(read_manifest(dir_ / "notab.tsv"), std::runtime_error);
  EXPECT_THROW(read_manifest(dir_ / "missing.tsv"), std::runtime_error);
}

TEST_F(Manifests, ClassList) {
  EXPECT_EQ(parse_class_list("a,b,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_THROW(parse_class_list("a,,c"), std::invalid_argument);
  EXPECT_THROW(parse_class_list("a,b,a"), std::invalid_argument);
  EXPECT_THROW(parse_class_list(""), std::invalid_argument);
}

TEST_F(Manifests, LoadDatasetFromImagesAndClips) {
  save_binary_pgm(dir_ / "g.pgm", synth::glyph(0, 32, 1));
  save_frames(dir_ / "clip", synth::synth_video(synth::VideoKind::TranslateSquare, 6, 2));
  write_bytes(dir_ / "m.tsv", "g.pgm\tglyph\nclip\tclip\n");
  const auto data = load_dataset(read_manifest(dir_ / "m.tsv"));
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0].image, synth::glyph(0, 32, 1));
  EXPECT_EQ(data[1].image.width(), 256);
  EXPECT_EQ(data[1].label, 1);
}

TEST_F(Checkpoints, BitExactRoundTrip) {
  const nn::NetworkSpec spec = build_compact_scnn(4, 32, 1, 16);
  const nn::Network<float> net(spec, nn::init_params<float>(spec, 77));
  const Checkpoint ck = make_checkpoint(net, {"a", "b", "c", "d"});
  save_checkpoint(dir_ / "n.ckpt", ck);
  const Checkpoint back = load_checkpoint(dir_ / "n.ckpt");
  EXPECT_EQ(back.spec, spec);
  EXPECT_EQ(back.labels, ck.labels);
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    for (std::size_t j = 0; j < ck.params.layers[i].size(); ++j) {
      EXPECT_EQ(back.params.layers[i][j].role, ck.params.layers[i][j].role);
      EXPECT_EQ(back.params.layers[i][j].value, ck.params.layers[i][j].value);
    }
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ck));
  const auto x = make_batch<float>(synth::glyph(2, 32, 5));
  EXPECT_EQ(back.network().infer(x), net.infer(x));
}

TEST_F(Checkpoints, CorruptInputsRejected) {
  const nn::NetworkSpec spec = build_compact_scnn(2, 16, 1, 4);
  const std::string good = serialize_checkpoint(make_checkpoint(nn::Network<float>(spec, nn::init_params<float>(spec, 1)), {"x", "y"}));
  EXPECT_NO_THROW(deserialize_checkpoint(good));

  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad), FormatError);
  bad = good;
  bad[4] = 9;  // version
  EXPECT_THROW(deserialize_checkpoint(bad), FormatError);
  EXPECT_THROW(deserialize_checkpoint(good.substr(0, good.size() - 3)), FormatError);
  EXPECT_THROW(deserialize_checkpoint(good + "z"), FormatError);
  EXPECT_THROW(deserialize_checkpoint(""), FormatError);
  EXPECT_THROW(load_checkpoint(dir_ / "none.ckpt"), std::runtime_error);
}

TEST_F(Checkpoints, LabelCountMustMatchClasses) {
  const nn::NetworkSpec spec = build_compact_scnn(2, 16, 1, 4);
  const Checkpoint ck = make_checkpoint(nn::Network<float>(spec, nn::init_params<float>(spec, 1)), {"x", "y", "z"});
  EXPECT_THROW(serialize_checkpoint(ck), std::invalid_argument);
}
