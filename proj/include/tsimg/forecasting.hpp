#pragma once

#include <functional>
#include <span>

#include "tsimg/models.hpp"

namespace tsimg {

/// Reconstruction forecasting (framework d) geometry for one look-back window.
///
/// UVH: the look-back is stacked into L-row columns, ceil(T'/L) horizon
/// columns are appended. MVH: each column is one time step over d variates,
/// T' horizon columns are appended. Horizon columns in the model input repeat
/// the last look-back column; the mask covers every patch that reaches them.
enum class FrameLayout { UVH, MVH };

struct ReconstructionFrame {
  FrameLayout layout = FrameLayout::UVH;
  int rows = 0;             // L (UVH) or d (MVH)
  int lookback_length = 0;  // H
  int horizon = 0;          // T'
  int lookback_cols = 0;
  int horizon_cols = 0;
  int image_size = 0;
  int patch_size = 0;
  PatchSequence input;
  ForecastMask mask;
  double mean = 0.0;  // standardization of the resized input image
  double stddev = 1.0;
  bool degenerate = false;

  /// Future values needed to fill every horizon pixel (>= horizon).
  int horizon_extent() const;
};

ReconstructionFrame prepare_uvh_frame(std::span<const double> lookback, int L, int horizon, int image_size,
                                      int patch_size);

/// `lookback` is d x H.
ReconstructionFrame prepare_mvh_frame(const Matrix& lookback, int horizon, int image_size, int patch_size);

/// Patches of the ground-truth image (look-back plus true continuation),
/// standardized with the frame's input statistics. `lookback` and `future`
/// are 1 x n (UVH) or d x n (MVH). `future` may be shorter than
/// horizon_extent(): UVH continues the series with period L, MVH repeats the
/// last available column.
Matrix frame_target_patches(const ReconstructionFrame& frame, const Matrix& lookback, const Matrix& future);

/// Pulls the forecast out of reconstructed patches: unpatchify, channel mean,
/// de-standardize, resize back to the source grid, read the horizon cells.
/// Returns 1 x T' (UVH) or d x T' (MVH).
Matrix recover_forecast(const ReconstructionFrame& frame, const PatchSequence& reconstructed);

using Reconstructor = std::function<PatchSequence(const PatchSequence&, const ForecastMask&)>;

Matrix forecast_with(const ReconstructionFrame& frame, const Reconstructor& reconstruct);

/// End-to-end UVH reconstruction forecast for one univariate look-back.
Vector predict_forecast(std::span<const double> lookback, int L, int horizon, const ParamSet& params,
                        const ModelConfig& config);

/// Same pipeline with an arbitrary reconstruction stage.
Vector predict_forecast(std::span<const double> lookback, int L, int horizon, int image_size, int patch_size,
                        const Reconstructor& reconstruct);

}  // namespace tsimg
