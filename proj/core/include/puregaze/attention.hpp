#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "puregaze/tensor.hpp"

namespace puregaze {

/// Pixel coordinate as (row, col). May be fractional.
struct PixelCoord {
  double row = 0.0;
  double col = 0.0;
};

/// Spatial weight map built from unit-peak Gaussians at the eye centers,
/// combined by pointwise maximum so every weight stays in [0,1] and each
/// center carries weight exactly 1.
struct AttentionMap {
  int h = 0;
  int w = 0;
  double sigma_sq = 0.0;
  std::vector<PixelCoord> centers;
  std::vector<double> weights;  // h*w row-major

  double at(int row, int col) const { return weights[static_cast<std::size_t>(row) * w + col]; }
};

/// weight(p) = max over centers of exp(-|p - mu|^2 / (2 sigma_sq)).
/// Centers must lie inside [0, h-1] x [0, w-1]; the list must be nonempty.
AttentionMap build_attention_map(int height, int width, const std::vector<PixelCoord>& eye_centers,
                                 double sigma_sq);

/// Effective variance when sigma_sq was declared at a different resolution:
/// scales by the squared resolution ratio so the map covers the same
/// fraction of the face at any input size.
double rescale_sigma_sq(double sigma_sq, int declared_resolution, int actual_resolution);

/// Writes the map into channel 0 of sample `index` of a (n,1,h,w) tensor.
void fill_attention_batch(const AttentionMap& map, Tensor& batch, int index);

/// Grayscale export for documentation figures.
void save_attention_pgm(const AttentionMap& map, const std::filesystem::path& path);

}  // namespace puregaze
