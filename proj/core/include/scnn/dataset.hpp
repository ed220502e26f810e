#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scnn/imaging.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

struct LabeledImage {
  imaging::BinaryImage image;
  int label = 0;
};

/// Packs binary images into an NHWC batch, replicating the single plane into
/// `channels` channels. All images must share one size.
template <typename T>
nn::Tensor<T> make_batch(std::span<const imaging::BinaryImage* const> images,
                         std::size_t channels = 1) {
  if (images.empty()) throw std::invalid_argument("make_batch: no images");
  const int w = images.front()->width();
  const int h = images.front()->height();
  nn::Tensor<T> batch({images.size(), static_cast<std::size_t>(h), static_cast<std::size_t>(w),
                       channels});
  T* out = batch.data();
  for (const imaging::BinaryImage* img : images) {
    if (img->width() != w || img->height() != h) {
      throw std::invalid_argument("make_batch: images differ in size");
    }
    for (std::uint8_t px : img->pixels()) {
      const T v = px ? T{1} : T{0};
      for (std::size_t c = 0; c < channels; ++c) *out++ = v;
    }
  }
  return batch;
}

template <typename T>
nn::Tensor<T> make_batch(const imaging::BinaryImage& image, std::size_t channels = 1) {
  const imaging::BinaryImage* one[] = {&image};
  return make_batch<T>(std::span<const imaging::BinaryImage* const>(one), channels);
}

}  // namespace scnn
