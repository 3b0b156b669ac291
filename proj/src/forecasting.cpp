#include "tsimg/forecasting.hpp"

#include <algorithm>

#include "tsimg/error.hpp"

namespace tsimg {

namespace {

double effective_scale(const ReconstructionFrame& f) { return f.degenerate ? 1.0 : f.stddev; }

// UVH source grid: padded look-back followed by `extra` continuation values.
Matrix uvh_grid(std::span<const double> lookback, std::span<const double> continuation, int L, int lookback_cols,
                int horizon_cols) {
  const int H = static_cast<int>(lookback.size());
  const int pad = lookback_cols * L - H;
  const int total = (lookback_cols + horizon_cols) * L;
  std::vector<double> series(static_cast<std::size_t>(total));
  for (int i = 0; i < pad; ++i) series[i] = lookback.front();
  for (int i = 0; i < H; ++i) series[pad + i] = lookback[i];
  const int known = pad + H;
  for (int i = known; i < total; ++i) {
    const int j = i - known;
    series[i] = j < static_cast<int>(continuation.size()) ? continuation[j] : series[i - L];
  }
  Matrix grid(L, lookback_cols + horizon_cols);
  for (int i = 0; i < total; ++i) grid(i % L, i / L) = series[i];
  return grid;
}

PatchSequence grid_to_patches(const Matrix& grid, const ReconstructionFrame& f, bool standardize_with_frame,
                              double* mean, double* stddev, bool* degenerate) {
  const GrayImage resized = resize_bilinear(GrayImage(grid), f.image_size, f.image_size);
  GrayImage standardized;
  if (standardize_with_frame) {
    standardized = GrayImage(((resized.pixels.array() - f.mean) / effective_scale(f)).matrix());
  } else {
    StandardizedImage s = standardize_image(resized);
    *mean = s.mean;
    *stddev = s.stddev;
    *degenerate = s.degenerate;
    standardized = std::move(s.image);
  }
  AlignedImage aligned = replicate_channels(standardized);
  aligned.source_height = static_cast<int>(grid.rows());
  aligned.source_width = static_cast<int>(grid.cols());
  return patchify(aligned, f.patch_size);
}

void finish_frame(ReconstructionFrame& f, const Matrix& input_grid) {
  f.mask = build_forecast_mask(f.rows, f.lookback_cols, f.horizon_cols, f.image_size, f.patch_size);
  if (f.mask.masked_patch_indices.empty()) {
    fail(ErrorCode::InvalidArgument, "horizon occupies less than half a pixel column at image size " +
                                         std::to_string(f.image_size) + "; nothing to reconstruct");
  }
  if (f.mask.boundary_col < f.patch_size) {
    fail(ErrorCode::HorizonTooLong, "horizon columns (" + std::to_string(f.horizon_cols) +
                                        ") leave no unmasked patch column next to " +
                                        std::to_string(f.lookback_cols) + " look-back columns");
  }
  f.input = grid_to_patches(input_grid, f, false, &f.mean, &f.stddev, &f.degenerate);
}

}  // namespace

int ReconstructionFrame::horizon_extent() const {
  return layout == FrameLayout::UVH ? horizon_cols * rows : horizon;
}

ReconstructionFrame prepare_uvh_frame(std::span<const double> lookback, int L, int horizon, int image_size,
                                      int patch_size) {
  require(!lookback.empty(), ErrorCode::EmptyInput, "empty look-back");
  if (L < 1) fail(ErrorCode::InvalidL, "segment length must be >= 1");
  require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  ReconstructionFrame f;
  f.layout = FrameLayout::UVH;
  f.rows = L;
  f.lookback_length = static_cast<int>(lookback.size());
  f.horizon = horizon;
  f.lookback_cols = uvh_geometry(f.lookback_length, L).columns;
  f.horizon_cols = (horizon + L - 1) / L;
  f.image_size = image_size;
  f.patch_size = patch_size;
  Matrix grid = uvh_grid(lookback, {}, L, f.lookback_cols, f.horizon_cols);
  for (int c = f.lookback_cols; c < f.lookback_cols + f.horizon_cols; ++c) grid.col(c) = grid.col(f.lookback_cols - 1);
  finish_frame(f, grid);
  return f;
}

ReconstructionFrame prepare_mvh_frame(const Matrix& lookback, int horizon, int image_size, int patch_size) {
  require(lookback.rows() >= 1 && lookback.cols() >= 1, ErrorCode::EmptyInput, "empty look-back");
  require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  ReconstructionFrame f;
  f.layout = FrameLayout::MVH;
  f.rows = static_cast<int>(lookback.rows());
  f.lookback_length = static_cast<int>(lookback.cols());
  f.horizon = horizon;
  f.lookback_cols = f.lookback_length;
  f.horizon_cols = horizon;
  f.image_size = image_size;
  f.patch_size = patch_size;
  Matrix grid(f.rows, f.lookback_cols + f.horizon_cols);
  grid.leftCols(f.lookback_cols) = lookback;
  grid.rightCols(f.horizon_cols) = lookback.col(f.lookback_cols - 1).replicate(1, f.horizon_cols);
  finish_frame(f, grid);
  return f;
}

Matrix frame_target_patches(const ReconstructionFrame& f, const Matrix& lookback, const Matrix& future) {
  Matrix grid;
  if (f.layout == FrameLayout::UVH) {
    require(lookback.rows() == 1 && lookback.cols() == f.lookback_length, ErrorCode::ShapeMismatch,
            "look-back does not match the frame");
    require(future.rows() == 1 || future.size() == 0, ErrorCode::ShapeMismatch, "UVH future must be 1 x n");
    const Eigen::RowVectorXd lb = lookback.row(0);
    const Eigen::RowVectorXd fu = future.size() ? Eigen::RowVectorXd(future.row(0)) : Eigen::RowVectorXd();
    grid = uvh_grid(std::span<const double>(lb.data(), static_cast<std::size_t>(lb.size())),
                    std::span<const double>(fu.data(), static_cast<std::size_t>(fu.size())), f.rows, f.lookback_cols,
                    f.horizon_cols);
  } else {
    require(lookback.rows() == f.rows && lookback.cols() == f.lookback_length, ErrorCode::ShapeMismatch,
            "look-back does not match the frame");
    require(future.rows() == f.rows || future.size() == 0, ErrorCode::ShapeMismatch, "future must be d x n");
    grid.resize(f.rows, f.lookback_cols + f.horizon_cols);
    grid.leftCols(f.lookback_cols) = lookback;
    for (int j = 0; j < f.horizon_cols; ++j) {
      const int c = f.lookback_cols + j;
      if (j < future.cols()) {
        grid.col(c) = future.col(j);
      } else {
        grid.col(c) = grid.col(c - 1);
      }
    }
  }
  return grid_to_patches(grid, f, true, nullptr, nullptr, nullptr).patches;
}

Matrix recover_forecast(const ReconstructionFrame& f, const PatchSequence& reconstructed) {
  if (reconstructed.count() != f.input.count() || reconstructed.patch_dim() != f.input.patch_dim()) {
    fail(ErrorCode::ShapeMismatch, "reconstruction does not match the frame's patch grid");
  }
  const GrayImage gray = unpatchify(reconstructed).to_gray();
  const GrayImage raw((gray.pixels.array() * effective_scale(f) + f.mean).matrix());
  const GrayImage source = resize_bilinear(raw, f.rows, f.lookback_cols + f.horizon_cols);
  if (f.layout == FrameLayout::MVH) return source.pixels.middleCols(f.lookback_cols, f.horizon);
  Matrix out(1, f.horizon);
  const int offset = f.lookback_cols * f.rows;
  for (int j = 0; j < f.horizon; ++j) {
    const int pos = offset + j;
    out(0, j) = source(pos % f.rows, pos / f.rows);
  }
  return out;
}

Matrix forecast_with(const ReconstructionFrame& frame, const Reconstructor& reconstruct) {
  return recover_forecast(frame, reconstruct(frame.input, frame.mask));
}

Vector predict_forecast(std::span<const double> lookback, int L, int horizon, const ParamSet& params,
                        const ModelConfig& config) {
  require(config.task == Task::ForecastReconstruct, ErrorCode::RoutingError,
          "predict_forecast needs a reconstruction model");
  if (static_cast<int>(lookback.size()) < L) {
    fail(ErrorCode::InvalidArgument, "look-back shorter than one segment");
  }
  return predict_forecast(lookback, L, horizon, config.image_size, config.patch_size,
                          [&](const PatchSequence& seq, const ForecastMask& mask) {
                            return forward_reconstruct(seq, mask, params, config);
                          });
}

Vector predict_forecast(std::span<const double> lookback, int L, int horizon, int image_size, int patch_size,
                        const Reconstructor& reconstruct) {
  const ReconstructionFrame frame = prepare_uvh_frame(lookback, L, horizon, image_size, patch_size);
  return forecast_with(frame, reconstruct).row(0).transpose();
}

}  // namespace tsimg
