#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "puregaze/tensor.hpp"

namespace puregaze {

/// 8-bit interleaved HWC image, 1 or 3 channels. On-disk format is binary
/// PPM (P6) for color and PGM (P5) for grayscale; both are lossless.
struct ImageU8 {
  int h = 0;
  int w = 0;
  int channels = 0;
  std::vector<std::uint8_t> pix;  // h*w*channels, row-major, interleaved

  std::uint8_t& at(int y, int x, int c) { return pix[(static_cast<std::size_t>(y) * w + x) * channels + c]; }
  std::uint8_t at(int y, int x, int c) const { return pix[(static_cast<std::size_t>(y) * w + x) * channels + c]; }
};

void write_pnm(const std::filesystem::path& path, const ImageU8& img);
ImageU8 read_pnm(const std::filesystem::path& path);

/// Quantizes [0,1] planar CHW doubles (sample `index` of a batch tensor)
/// to an 8-bit image. Values are clamped, then rounded to nearest.
ImageU8 to_image_u8(const Tensor& batch, int index);

/// Loads an 8-bit image into sample `index` of a (n,c,h,w) batch as [0,1].
void load_into_batch(const ImageU8& img, Tensor& batch, int index);

/// Mean of all pixel values mapped to [0,1]. Used for illumination buckets.
double mean_intensity(const ImageU8& img);

}  // namespace puregaze
