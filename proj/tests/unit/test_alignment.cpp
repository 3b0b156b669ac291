#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "tsimg/alignment.hpp"

namespace tsimg {
namespace {

using testing::code_of;
using testing::random_matrix;

double population_std(const Matrix& m) {
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().mean());
}

TEST(Resize, SameSizeIsIdentity) {
  Rng rng(1);
  const GrayImage img(random_matrix(rng, 4, 4));
  EXPECT_LE((resize_bilinear(img, 4, 4).pixels - img.pixels).cwiseAbs().maxCoeff(), 1e-12);
  const GrayImage wide(random_matrix(rng, 3, 17));
  EXPECT_LE((resize_bilinear(wide, 3, 17).pixels - wide.pixels).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Resize, CheckerboardStaysInRange) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  const GrayImage out = resize_bilinear(GrayImage(m), 4, 4);
  EXPECT_GE(out.pixels.minCoeff(), 0.0);
  EXPECT_LE(out.pixels.maxCoeff(), 1.0);
  EXPECT_EQ(out(0, 0), 0.0);  // border clamp keeps the corner
}

TEST(Resize, ConstantsArePreserved) {
  const GrayImage img(3, 5, 2.5);
  const GrayImage out = resize_bilinear(img, 11, 7);
  EXPECT_EQ(out.height(), 11);
  EXPECT_EQ(out.width(), 7);
  EXPECT_TRUE((out.pixels.array() == 2.5).all());
}

TEST(Resize, HalfPixelCenters) {
  Matrix m(1, 2);
  m << 0, 4;
  const GrayImage out = resize_bilinear(GrayImage(m), 1, 4);
  // src = (dst + 0.5) / 2 - 0.5 -> -0.25, 0.25, 0.75, 1.25
  EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(out(0, 2), 3.0);
  EXPECT_DOUBLE_EQ(out(0, 3), 4.0);
}

TEST(StandardizeImage, SmallExample) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const auto s = standardize_image(GrayImage(m));
  EXPECT_NEAR(s.image.pixels.mean(), 0.0, 1e-15);
  EXPECT_NEAR(population_std(s.image.pixels), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_FALSE(s.degenerate);
}

TEST(StandardizeImage, InvariantsOnRandomImages) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(20));
    const int w = 2 + static_cast<int>(rng.below(20));
    const GrayImage img(random_matrix(rng, h, w, 1.0 + trial) .array() + trial);
    const auto s = standardize_image(img);
    EXPECT_LE(std::abs(s.image.pixels.mean()), 1e-9);
    EXPECT_LE(std::abs(population_std(s.image.pixels) - 1.0), 1e-9);
    const auto twice = standardize_image(s.image);
    EXPECT_LE((twice.image.pixels - s.image.pixels).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(StandardizeImage, ConstantIsFlagged) {
  const auto s = standardize_image(GrayImage(3, 3, 7.0));
  EXPECT_TRUE(s.degenerate);
  EXPECT_TRUE(s.image.pixels.isZero());
}

TEST(ReplicateChannels, IdenticalChannels) {
  Rng rng(4);
  const GrayImage img(random_matrix(rng, 8, 8));
  const AlignedImage a = replicate_channels(img);
  EXPECT_EQ(a.channels[0], img.pixels);
  EXPECT_EQ(a.channels[1], img.pixels);
  EXPECT_EQ(a.channels[2], img.pixels);
  EXPECT_LT((a.to_gray().pixels - img.pixels).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(code_of([] { replicate_channels(GrayImage(2, 3)); }), ErrorCode::NotSquare);
}

TEST(Patchify, LayoutAndCount) {
  Matrix m(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = 10 * r + c;
  }
  const PatchSequence seq = patchify(replicate_channels(GrayImage(m)), 2);
  EXPECT_EQ(seq.count(), 4);
  EXPECT_EQ(seq.grid_rows, 2);
  EXPECT_EQ(seq.grid_cols, 2);
  EXPECT_EQ(seq.patch_dim(), 12);
  // Patch 1 is the top-right block; channel 0 comes first, row-major inside.
  EXPECT_EQ(seq.patches(1, 0), 2.0);
  EXPECT_EQ(seq.patches(1, 1), 3.0);
  EXPECT_EQ(seq.patches(1, 2), 12.0);
  EXPECT_EQ(seq.patches(1, 3), 13.0);
  EXPECT_EQ(seq.patches(1, 4), 2.0);
  EXPECT_EQ(seq.patches(2, 0), 20.0);
}

TEST(Patchify, RoundTripIsBitwise) {
  Rng rng(9);
  for (auto [S, P] : {std::pair{16, 8}, std::pair{12, 4}, std::pair{8, 8}, std::pair{6, 1}}) {
    const AlignedImage a = replicate_channels(GrayImage(random_matrix(rng, S, S)));
    const AlignedImage b = unpatchify(patchify(a, P));
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(b.channels[ch], a.channels[ch]);
  }
  const AlignedImage zeros = replicate_channels(GrayImage(8, 8, 0.0));
  EXPECT_EQ(unpatchify(patchify(zeros, 4)).channels[0], zeros.channels[0]);
}

TEST(Patchify, Indivisible) {
  EXPECT_EQ(code_of([] { patchify(replicate_channels(GrayImage(10, 10)), 4); }), ErrorCode::IndivisiblePatch);
}

TEST(ForecastMask, SymmetricSplitMasksRightHalf) {
  const ForecastMask m = build_forecast_mask(24, 4, 4, 64, 8);
  EXPECT_EQ(m.boundary_col, 32);
  EXPECT_EQ(m.masked_patch_indices.size(), 32u);
  for (int idx = 0; idx < 64; ++idx) EXPECT_EQ(m.is_masked(idx), idx % 8 >= 4);
}

TEST(ForecastMask, BoundaryInsidePatchMasksWholeColumn) {
  // boundary = round(64 * 5 / 8) = 40 -> patch column 5; 3/7 -> round(27.43) = 27 -> column 3.
  const ForecastMask m = build_forecast_mask(24, 3, 4, 64, 8);
  EXPECT_EQ(m.boundary_col, 27);
  EXPECT_FALSE(m.is_masked(2));
  EXPECT_TRUE(m.is_masked(3));
  EXPECT_EQ(m.masked_patch_indices.size(), 5u * 8u);
}

TEST(ForecastMask, MonotoneInHorizon) {
  for (int h = 1; h < 10; ++h) {
    const auto a = build_forecast_mask(12, 6, h, 32, 4).flags();
    const auto b = build_forecast_mask(12, 6, h + 1, 32, 4).flags();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(!a[i] || b[i]);
  }
}

TEST(ForecastMask, ZeroHorizonRejected) {
  EXPECT_EQ(code_of([] { build_forecast_mask(12, 4, 0, 32, 8); }), ErrorCode::InvalidArgument);
}

TEST(AlignImage, RecordsStatistics) {
  Rng rng(3);
  const GrayImage img(random_matrix(rng, 5, 9, 2.0));
  const AlignedInput in = align_image(img, 16, 4);
  EXPECT_EQ(in.patches.count(), 16);
  const auto st = standardize_image(resize_bilinear(img, 16, 16));
  EXPECT_EQ(in.mean, st.mean);
  EXPECT_EQ(in.stddev, st.stddev);
}

}  // namespace
}  // namespace tsimg
