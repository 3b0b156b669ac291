#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tsimg/forecasting.hpp"

namespace tsimg {
namespace {

using testing::code_of;
using testing::sine;

// Copies the last look-back pixel column into every masked column.
PatchSequence copy_left_column(const PatchSequence& seq, const ForecastMask& mask) {
  AlignedImage img = unpatchify(seq);
  const int S = static_cast<int>(img.channels[0].rows());
  const int first_masked = (mask.boundary_col / seq.patch_size) * seq.patch_size;
  for (auto& ch : img.channels) {
    for (int c = first_masked; c < S; ++c) ch.col(c) = ch.col(mask.boundary_col - 1);
  }
  return patchify(img, seq.patch_size);
}

PatchSequence identity(const PatchSequence& seq, const ForecastMask&) { return seq; }

TEST(UvhFrame, GeometryWithoutResize) {
  const auto x = sine(16, 192, 0.3);
  const auto f = prepare_uvh_frame(x.values, 16, 64, 16, 4);
  EXPECT_EQ(f.lookback_cols, 12);
  EXPECT_EQ(f.horizon_cols, 4);
  EXPECT_EQ(f.mask.boundary_col, 12);
  EXPECT_EQ(f.mask.masked_patch_indices.size(), 4u);
  EXPECT_EQ(f.horizon_extent(), 64);
}

TEST(UvhFrame, CopyLeftColumnIsExactOnPeriodicInput) {
  const int L = 16;
  const auto x = sine(L, 192 + 64, 0.3);
  const std::vector<double> lookback(x.values.begin(), x.values.begin() + 192);
  const Vector forecast = predict_forecast(lookback, L, 64, 16, 4, copy_left_column);
  ASSERT_EQ(forecast.size(), 64);
  for (int t = 0; t < 64; ++t) EXPECT_NEAR(forecast(t), x[192 + t], 1e-12) << t;
}

TEST(UvhFrame, OneHorizonColumnWhenHorizonIsL) {
  const auto x = sine(12, 96);
  const auto f = prepare_uvh_frame(x.values, 12, 12, 32, 8);
  EXPECT_EQ(f.horizon_cols, 1);
  EXPECT_EQ(forecast_with(f, identity).cols(), 12);
}

TEST(UvhFrame, IdentityStubReturnsLookbackPixels) {
  // Horizon columns of the input repeat the last look-back column, so the
  // identity stub forecasts the previous segment.
  const auto x = sine(24, 96, 1.0);
  const Vector y = predict_forecast(x.values, 24, 24, 24 * 5, 24, identity);
  for (int t = 0; t < 24; ++t) EXPECT_NEAR(y(t), x[72 + t], 1e-9);
}

TEST(UvhFrame, TargetPatchesRecoverTruth) {
  const int L = 24;
  const auto x = sine(L, 336 + 48, 0.2);
  const std::vector<double> lb(x.values.begin(), x.values.begin() + 336);
  const auto f = prepare_uvh_frame(lb, L, 48, 32, 8);
  Matrix lookback(1, 336);
  Matrix future(1, 48);
  for (int t = 0; t < 336; ++t) lookback(0, t) = x[t];
  for (int t = 0; t < 48; ++t) future(0, t) = x[336 + t];
  PatchSequence target = f.input;
  target.patches = frame_target_patches(f, lookback, future);
  const Matrix rec = recover_forecast(f, target);
  ASSERT_EQ(rec.cols(), 48);
  double mse = 0.0;
  for (int t = 0; t < 48; ++t) mse += std::pow(rec(0, t) - future(0, t), 2) / 48.0;
  EXPECT_LT(mse, 0.01);
}

TEST(UvhFrame, HorizonTooLong) {
  const auto x = sine(8, 16);
  EXPECT_EQ(code_of([&] { prepare_uvh_frame(x.values, 8, 64, 16, 8); }), ErrorCode::HorizonTooLong);
}

TEST(MvhFrame, CopyLeftColumnOnConstantRows) {
  Matrix lb(3, 48);
  // Rows share one value: vertical resizing blends neighbouring variates.
  lb.setConstant(-1.5);
  const auto f = prepare_mvh_frame(lb, 16, 64, 8);
  EXPECT_EQ(f.rows, 3);
  EXPECT_EQ(f.horizon_cols, 16);
  const Matrix y = forecast_with(f, copy_left_column);
  ASSERT_EQ(y.rows(), 3);
  ASSERT_EQ(y.cols(), 16);
  EXPECT_NEAR((y.array() + 1.5).abs().maxCoeff(), 0.0, 1e-9);
}

TEST(Predict, RequiresReconstructionModel) {
  ModelConfig c;
  c.arch = Arch::LVM2Attn;
  c.task = Task::ForecastLinear;
  c.image_size = 16;
  c.patch_size = 8;
  c.embed_dim = 8;
  c.num_heads = 2;
  const auto x = sine(8, 64);
  EXPECT_EQ(code_of([&] { predict_forecast(x.values, 8, 8, init_params(c, 0), c); }), ErrorCode::RoutingError);
}

}  // namespace
}  // namespace tsimg
