#include "puregaze/attention.hpp"

#include <cmath>
#include <string>

#include "puregaze/common.hpp"
#include "puregaze/image.hpp"

namespace puregaze {

AttentionMap build_attention_map(int height, int width, const std::vector<PixelCoord>& eye_centers,
                                 double sigma_sq) {
  if (height <= 0 || width <= 0) throw DomainError("attention map needs positive dimensions");
  if (!(sigma_sq > 0.0)) throw DomainError("attention sigma_sq must be positive");
  if (eye_centers.empty()) throw DomainError("attention map needs at least one eye center");
  for (const auto& c : eye_centers) {
    if (c.row < 0.0 || c.row > height - 1 || c.col < 0.0 || c.col > width - 1) {
      throw DomainError("eye center (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                        ") outside " + std::to_string(height) + "x" + std::to_string(width) + " image");
    }
  }

  AttentionMap map;
  map.h = height;
  map.w = width;
  map.sigma_sq = sigma_sq;
  map.centers = eye_centers;
  map.weights.assign(static_cast<std::size_t>(height) * width, 0.0);

  const double inv_two_var = 1.0 / (2.0 * sigma_sq);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double best = 0.0;
      for (const auto& mu : eye_centers) {
        const double dr = r - mu.row;
        const double dc = c - mu.col;
        const double g = std::exp(-(dr * dr + dc * dc) * inv_two_var);
        if (g > best) best = g;
      }
      map.weights[static_cast<std::size_t>(r) * width + c] = best;
    }
  }
  return map;
}

double rescale_sigma_sq(double sigma_sq, int declared_resolution, int actual_resolution) {
  if (declared_resolution <= 0 || actual_resolution <= 0) {
    throw DomainError("resolutions must be positive");
  }
  const double ratio = static_cast<double>(actual_resolution) / declared_resolution;
  return sigma_sq * ratio * ratio;
}

void fill_attention_batch(const AttentionMap& map, Tensor& batch, int index) {
  if (batch.c() != 1 || batch.h() != map.h || batch.w() != map.w) {
    throw DomainError("attention batch shape " + batch.shape_str() + " does not match map");
  }
  double* dst = batch.sample(index);
  std::copy(map.weights.begin(), map.weights.end(), dst);
}

void save_attention_pgm(const AttentionMap& map, const std::filesystem::path& path) {
  ImageU8 img;
  img.h = map.h;
  img.w = map.w;
  img.channels = 1;
  img.pix.resize(map.weights.size());
  for (std::size_t i = 0; i < map.weights.size(); ++i) {
    img.pix[i] = static_cast<std::uint8_t>(std::lround(std::clamp(map.weights[i], 0.0, 1.0) * 255.0));
  }
  write_pnm(path, img);
}

}  // namespace puregaze
