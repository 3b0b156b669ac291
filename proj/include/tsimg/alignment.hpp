#pragma once

#include <array>
#include <vector>

#include "tsimg/imaging.hpp"

namespace tsimg {

/// Square three-channel model input with bitwise identical channels.
struct AlignedImage {
  std::array<Matrix, 3> channels;
  int source_height = 0;
  int source_width = 0;
  int model_size = 0;

  /// Channel mean as a single gray image.
  GrayImage to_gray() const;
};

/// Row-major sequence of flattened patches. Each row is one patch laid out
/// channel-major, then row-major inside the channel (length 3 * P * P).
struct PatchSequence {
  Matrix patches;
  int grid_rows = 0;
  int grid_cols = 0;
  int patch_size = 0;

  int count() const { return static_cast<int>(patches.rows()); }
  int patch_dim() const { return static_cast<int>(patches.cols()); }
};

struct ForecastMask {
  std::vector<int> masked_patch_indices;  // ascending
  int boundary_col = 0;
  int grid_cols = 0;
  int grid_rows = 0;

  bool is_masked(int patch_index) const;
  std::vector<bool> flags() const;
};

/// Half-pixel-center bilinear resize with border clamping.
GrayImage resize_bilinear(const GrayImage& img, int out_h, int out_w);

struct StandardizedImage {
  GrayImage image;
  double mean = 0.0;
  double stddev = 0.0;  // population std of the input
  bool degenerate = false;
};

/// (I - mean(I)) / std(I); a constant image maps to zeros with `degenerate` set.
StandardizedImage standardize_image(const GrayImage& img);

AlignedImage replicate_channels(const GrayImage& img);

PatchSequence patchify(const AlignedImage& img, int patch_size);
AlignedImage unpatchify(const PatchSequence& seq);

/// Masks every patch whose column span reaches the horizon region
/// [boundary_col, S), boundary_col = round(S * lookback_cols / (lookback_cols + horizon_cols)).
ForecastMask build_forecast_mask(int L, int lookback_cols, int horizon_cols, int S, int P);

/// resize -> standardize -> replicate -> patchify in one step.
struct AlignedInput {
  PatchSequence patches;
  double mean = 0.0;
  double stddev = 1.0;
  bool degenerate = false;
};

AlignedInput align_image(const GrayImage& img, int image_size, int patch_size);

}  // namespace tsimg
