#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsimg/series.hpp"

namespace tsimg {

/// Single-channel image; pixels(row, col), row 0 is the top.
struct GrayImage {
  Matrix pixels;

  GrayImage() = default;
  explicit GrayImage(Matrix p) : pixels(std::move(p)) {}
  GrayImage(int height, int width, double fill = 0.0) : pixels(Matrix::Constant(height, width, fill)) {}

  int height() const { return static_cast<int>(pixels.rows()); }
  int width() const { return static_cast<int>(pixels.cols()); }
  double operator()(int r, int c) const { return pixels(r, c); }
  double& operator()(int r, int c) { return pixels(r, c); }
};

struct PeriodEstimate {
  std::vector<int> top_periods;      // distinct, by descending amplitude
  std::vector<int> top_frequencies;  // frequency that produced each period
  int chosen_L = 1;
  int dominant_frequency = 1;
  bool degenerate = false;  // flat spectrum (e.g. constant input)
};

/// Dominant period from the DFT amplitude over frequencies 1..floor(T/2).
/// Period for frequency f is ceil(T / f). Ties go to the lower frequency.
PeriodEstimate detect_period(const UnivariateSeries& x, int top_k = 3);

struct UvhGeometry {
  int padded_length = 0;  // smallest multiple of L >= T
  int pad = 0;            // number of left-pad values
  int columns = 0;        // padded_length / L
};

UvhGeometry uvh_geometry(int length, int L);

/// L x ceil(T/L) heatmap; column c holds padded x[c*L .. c*L + L). The left
/// pad repeats the first observed value.
GrayImage uvh(const UnivariateSeries& x, int L);
UnivariateSeries uvh_inverse(const GrayImage& img, int original_length);

/// d x T image of the series matrix.
GrayImage mvh(const MultivariateSeries& X);

struct GafContext {
  double min = 0.0;
  double max = 0.0;
};

struct GafResult {
  GrayImage image;
  GafContext context;
  bool degenerate = false;  // max == min; scaled values set to 0.5
};

/// Gramian angular summation field.
GafResult gaf(const UnivariateSeries& x);

/// Recovers the series from the diagonal of a (possibly reconstructed) GAF.
/// Output is confined to [ctx.min, ctx.max].
UnivariateSeries gaf_diag_inverse(const GrayImage& img, const GafContext& ctx);

/// Unthresholded recurrence plot: Euclidean distances between delay vectors.
GrayImage recurrence_plot(const UnivariateSeries& x, int embed_dim = 1, int delay = 1);

/// log(1 + |STFT|), periodic Hann window. Row k is frequency bin k (row 0 = DC),
/// column j is frame j.
GrayImage stft_spectrogram(const UnivariateSeries& x, int window_len, int hop);

/// |CWT| with an L1-normalized Morlet wavelet (omega0 = 6). Row j uses the
/// scale whose Fourier period is wavelet_periods(T, num_scales)[j].
GrayImage wavelet_scalogram(const UnivariateSeries& x, int num_scales = 32);

/// Fourier periods (in samples) of the scalogram rows; geometric from 2 to T.
std::vector<double> wavelet_periods(int length, int num_scales);

/// n_filters x n_bins triangular filters evenly spaced on the linear frequency
/// axis, each normalized to unit sum.
Matrix triangular_filterbank(int n_bins, int n_filters);

/// log(1 + F |STFT|) with F from triangular_filterbank.
GrayImage filterbank_spectrogram(const UnivariateSeries& x, int window_len, int hop, int n_filters = 32);

/// Binary raster of the connected line plot; top row is the maximum value.
GrayImage lineplot_raster(const UnivariateSeries& x, int height, int width, int line_thickness = 1);

enum class ImagingMethod { LinePlot, MVH, UVH, STFT, Wavelet, Filterbank, GAF, RP };

inline constexpr ImagingMethod kAllImagingMethods[] = {
    ImagingMethod::LinePlot, ImagingMethod::MVH,        ImagingMethod::UVH, ImagingMethod::STFT,
    ImagingMethod::Wavelet,  ImagingMethod::Filterbank, ImagingMethod::GAF, ImagingMethod::RP};

std::string_view to_string(ImagingMethod method);
std::optional<ImagingMethod> parse_imaging_method(std::string_view name);

/// UVH and MVH keep raw values in pixels; only they support reconstruction forecasting.
bool preserves_values(ImagingMethod method);

struct ImagingOptions {
  ImagingMethod method = ImagingMethod::UVH;
  int uvh_period = 0;  // 0: detect per series
  int rp_embed_dim = 1;
  int rp_delay = 1;
  int stft_window = 64;  // clamped to T
  int stft_hop = 0;      // 0: window / 2
  int wavelet_scales = 32;
  int filterbank_filters = 32;
  int lineplot_height = 64;
  int lineplot_width = 64;
  int lineplot_thickness = 1;
};

/// Images a univariate series with any method other than MVH.
GrayImage render_univariate(const UnivariateSeries& x, const ImagingOptions& options);

/// One image per variate, or a single image for MVH.
std::vector<GrayImage> render(const MultivariateSeries& window, const ImagingOptions& options);

}  // namespace tsimg
