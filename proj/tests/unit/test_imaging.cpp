#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "test_util.hpp"
#include "tsimg/fft.hpp"
#include "tsimg/imaging.hpp"

namespace tsimg {
namespace {

using testing::code_of;
using testing::random_series;
using testing::sine;

UnivariateSeries iota_series(int n, double first = 1.0) {
  UnivariateSeries x;
  for (int i = 0; i < n; ++i) x.values.push_back(first + i);
  return x;
}

TEST(Rfft, MatchesNaiveDft) {
  Rng rng(3);
  for (int n : {1, 2, 7, 16, 45, 96}) {
    const auto x = random_series(rng, n);
    const auto X = rfft(x.values);
    ASSERT_EQ(X.size(), static_cast<std::size_t>(n / 2 + 1));
    for (int f = 0; f <= n / 2; ++f) {
      std::complex<double> acc{0.0, 0.0};
      for (int t = 0; t < n; ++t) acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * f * t / n);
      EXPECT_NEAR(std::abs(X[f] - acc), 0.0, 1e-9) << "n=" << n << " f=" << f;
    }
  }
}

TEST(DetectPeriod, PureSine) {
  const auto est = detect_period(sine(24, 1152));
  EXPECT_EQ(est.chosen_L, 24);
  EXPECT_EQ(est.dominant_frequency, 48);
  EXPECT_FALSE(est.degenerate);
}

TEST(DetectPeriod, TopPeriodsOfTwoTones) {
  UnivariateSeries x = sine(24, 1152);
  const auto slow = sine(96, 1152);
  for (std::size_t t = 0; t < x.size(); ++t) x.values[t] += 0.5 * slow[t];
  const auto est = detect_period(x, 2);
  ASSERT_EQ(est.top_periods.size(), 2u);
  EXPECT_EQ(est.top_periods[0], 24);
  EXPECT_EQ(est.top_periods[1], 96);
}

TEST(DetectPeriod, ConstantIsDegenerate) {
  UnivariateSeries x{std::vector<double>(50, 3.0)};
  const auto est = detect_period(x);
  EXPECT_TRUE(est.degenerate);
  EXPECT_EQ(est.dominant_frequency, 1);
  EXPECT_EQ(est.chosen_L, 50);
}

TEST(DetectPeriod, TooShort) {
  EXPECT_EQ(code_of([] { detect_period(iota_series(3)); }), ErrorCode::SeriesTooShort);
}

TEST(Uvh, StacksColumns) {
  const GrayImage img = uvh(iota_series(8), 4);
  ASSERT_EQ(img.height(), 4);
  ASSERT_EQ(img.width(), 2);
  for (int r = 0; r < 4; ++r) {
    EXPECT_EQ(img(r, 0), 1.0 + r);
    EXPECT_EQ(img(r, 1), 5.0 + r);
  }
}

TEST(Uvh, LeftPadRepeatsFirstValue) {
  const GrayImage img = uvh(iota_series(7), 4);
  ASSERT_EQ(img.width(), 2);
  EXPECT_EQ(img(0, 0), 1.0);
  EXPECT_EQ(img(1, 0), 1.0);
  EXPECT_EQ(img(3, 1), 7.0);
  EXPECT_EQ(uvh_inverse(img, 7).values, iota_series(7).values);
  const auto g = uvh_geometry(7, 4);
  EXPECT_EQ(g.pad, 1);
  EXPECT_EQ(g.padded_length, 8);
}

TEST(Uvh, RoundTripIsExact) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + static_cast<int>(rng.below(200));
    const int L = 1 + static_cast<int>(rng.below(40));
    const auto x = random_series(rng, T);
    EXPECT_EQ(uvh_inverse(uvh(x, L), T).values, x.values);
  }
}

TEST(Uvh, Errors) {
  EXPECT_EQ(code_of([] { uvh(iota_series(4), 0); }), ErrorCode::InvalidL);
  EXPECT_EQ(code_of([] { uvh_inverse(GrayImage(2, 2), 5); }), ErrorCode::LengthMismatch);
}

TEST(Mvh, IdentityLayout) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const GrayImage img = mvh(MultivariateSeries(m));
  EXPECT_EQ(img.pixels, m);
}

TEST(Gaf, DiagonalIdentityAndSymmetry) {
  Rng rng(5);
  const auto x = random_series(rng, 40);
  const auto res = gaf(x);
  const double lo = res.context.min;
  const double hi = res.context.max;
  ASSERT_EQ(res.image.height(), 40);
  for (int i = 0; i < 40; ++i) {
    const double s = (x[i] - lo) / (hi - lo);
    EXPECT_NEAR(res.image(i, i), 2.0 * s * s - 1.0, 1e-12);
    for (int j = 0; j < 40; ++j) {
      EXPECT_EQ(res.image(i, j), res.image(j, i));
      EXPECT_LE(std::abs(res.image(i, j)), 1.0);
    }
  }
}

TEST(Gaf, ExtremesAndInverse) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_series(rng, 30);
    const auto res = gaf(x);
    const auto back = gaf_diag_inverse(res.image, res.context);
    for (int i = 0; i < 30; ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
  }
  const auto res = gaf(UnivariateSeries{{0.0, 2.0}});
  EXPECT_NEAR(res.image(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(res.image(0, 0), -1.0, 1e-15);
}

TEST(Gaf, DegenerateAndNotSquare) {
  const auto res = gaf(UnivariateSeries{{4.0, 4.0, 4.0}});
  EXPECT_TRUE(res.degenerate);
  EXPECT_NEAR(res.image(0, 0), -0.5, 1e-15);
  EXPECT_EQ(code_of([] { gaf_diag_inverse(GrayImage(2, 3), GafContext{0.0, 1.0}); }), ErrorCode::NotSquare);
}

TEST(RecurrencePlot, PeriodicOffDiagonalIsZero) {
  const auto x = sine(12, 60);
  const GrayImage rp = recurrence_plot(x, 1, 1);
  ASSERT_EQ(rp.height(), 60);
  for (int i = 0; i + 12 < 60; ++i) EXPECT_NEAR(rp(i, i + 12), 0.0, 1e-12);
  for (int i = 0; i < 60; ++i) {
    EXPECT_EQ(rp(i, i), 0.0);
    for (int j = 0; j < 60; ++j) {
      EXPECT_EQ(rp(i, j), rp(j, i));
      EXPECT_GE(rp(i, j), 0.0);
    }
  }
}

TEST(RecurrencePlot, EmbeddingShrinksSide) {
  EXPECT_EQ(recurrence_plot(iota_series(20), 3, 2).height(), 16);
  EXPECT_TRUE(recurrence_plot(UnivariateSeries{std::vector<double>(9, 1.0)}).pixels.isZero());
  EXPECT_EQ(code_of([] { recurrence_plot(iota_series(5), 3, 3); }), ErrorCode::EmbeddingTooLarge);
}

TEST(Stft, FrameCountAndDominantBin) {
  const int window = 32;
  const int bin = 4;
  const auto x = sine(window / bin, 200);
  const GrayImage s = stft_spectrogram(x, window, 8);
  EXPECT_EQ(s.height(), window / 2 + 1);
  EXPECT_EQ(s.width(), (200 - window) / 8 + 1);
  for (int c = 0; c < s.width(); ++c) {
    Eigen::Index arg = 0;
    s.pixels.col(c).maxCoeff(&arg);
    EXPECT_EQ(arg, bin);
  }
  EXPECT_TRUE(stft_spectrogram(UnivariateSeries{std::vector<double>(64, 0.0)}, 16, 4).pixels.isZero());
  EXPECT_EQ(code_of([] { stft_spectrogram(iota_series(10), 16, 4); }), ErrorCode::WindowTooLong);
}

TEST(Wavelet, LinearityAndZeros) {
  Rng rng(8);
  const auto x = random_series(rng, 64);
  UnivariateSeries y = x;
  for (double& v : y.values) v *= -3.0;
  const GrayImage a = wavelet_scalogram(x, 8);
  const GrayImage b = wavelet_scalogram(y, 8);
  EXPECT_EQ(a.height(), 8);
  EXPECT_EQ(a.width(), 64);
  EXPECT_LT((b.pixels - 3.0 * a.pixels).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(wavelet_scalogram(UnivariateSeries{std::vector<double>(32, 0.0)}, 4).pixels.isZero());
}

TEST(Wavelet, EnergyPeaksAtNearestScale) {
  for (int period : {8, 16, 30}) {
    const int T = 256;
    const int scales = 24;
    const GrayImage img = wavelet_scalogram(sine(period, T), scales);
    Eigen::Index arg = 0;
    img.pixels.rowwise().mean().maxCoeff(&arg);
    const auto periods = wavelet_periods(T, scales);
    int nearest = 0;
    for (int j = 1; j < scales; ++j) {
      if (std::abs(std::log(periods[j] / period)) < std::abs(std::log(periods[nearest] / period))) nearest = j;
    }
    EXPECT_LE(std::abs(static_cast<int>(arg) - nearest), 1) << "period " << period;
  }
}

TEST(Filterbank, RowsSumToOne) {
  const Matrix bank = triangular_filterbank(33, 8);
  for (int j = 0; j < 8; ++j) EXPECT_NEAR(bank.row(j).sum(), 1.0, 1e-12);
  EXPECT_GE(bank.minCoeff(), 0.0);
}

TEST(Filterbank, ArgmaxRowCoversSineBin) {
  const int window = 64;
  const int sine_bin = 8;
  const GrayImage img = filterbank_spectrogram(sine(window / sine_bin, 256), window, 32, 8);
  const Matrix bank = triangular_filterbank(window / 2 + 1, 8);
  Eigen::Index arg = 0;
  img.pixels.rowwise().mean().maxCoeff(&arg);
  EXPECT_GT(bank(arg, sine_bin), 0.0);
  EXPECT_TRUE(filterbank_spectrogram(UnivariateSeries{std::vector<double>(64, 0.0)}, 16, 8, 4).pixels.isZero());
}

TEST(LinePlot, ConstantIsMidline) {
  const GrayImage img = lineplot_raster(UnivariateSeries{std::vector<double>(10, 2.0)}, 9, 10);
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 10; ++c) EXPECT_EQ(img(r, c), r == 4 ? 1.0 : 0.0);
  }
}

TEST(LinePlot, DiagonalIsConnected) {
  const GrayImage img = lineplot_raster(UnivariateSeries{{0.0, 1.0}}, 8, 8);
  EXPECT_EQ(img(7, 0), 1.0);
  EXPECT_EQ(img(0, 7), 1.0);
  // Every column has a lit pixel and consecutive lit pixels are 8-connected.
  int prev_row = -1;
  for (int c = 0; c < 8; ++c) {
    int lit = -1;
    for (int r = 0; r < 8; ++r) {
      ASSERT_TRUE(img(r, c) == 0.0 || img(r, c) == 1.0);
      if (img(r, c) == 1.0) lit = r;
    }
    ASSERT_GE(lit, 0);
    if (prev_row >= 0) EXPECT_LE(std::abs(lit - prev_row), 1);
    prev_row = lit;
  }
}

TEST(Render, MethodNamesRoundTrip) {
  for (ImagingMethod m : kAllImagingMethods) EXPECT_EQ(parse_imaging_method(to_string(m)), m);
  EXPECT_FALSE(parse_imaging_method("png").has_value());
  EXPECT_TRUE(preserves_values(ImagingMethod::UVH));
  EXPECT_TRUE(preserves_values(ImagingMethod::MVH));
  EXPECT_FALSE(preserves_values(ImagingMethod::GAF));
}

TEST(Render, OneImagePerVariateExceptMvh) {
  Rng rng(2);
  const MultivariateSeries w(testing::random_matrix(rng, 3, 48));
  ImagingOptions opt;
  opt.method = ImagingMethod::GAF;
  EXPECT_EQ(render(w, opt).size(), 3u);
  opt.method = ImagingMethod::MVH;
  const auto m = render(w, opt);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].height(), 3);
  opt.method = ImagingMethod::UVH;
  opt.uvh_period = 12;
  EXPECT_EQ(render(w, opt)[1].height(), 12);
}

}  // namespace
}  // namespace tsimg
