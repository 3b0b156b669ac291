#include "tsimg/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "tsimg/error.hpp"
#include "tsimg/fft.hpp"

namespace tsimg {

namespace {

constexpr double kMorletOmega0 = 6.0;

std::pair<double, double> min_max(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

void validate_stft(int length, int window_len, int hop) {
  require(window_len >= 2, ErrorCode::InvalidArgument, "window_len must be >= 2");
  require(hop >= 1, ErrorCode::InvalidArgument, "hop must be >= 1");
  if (window_len > length) {
    fail(ErrorCode::WindowTooLong,
         "window_len " + std::to_string(window_len) + " exceeds series length " + std::to_string(length));
  }
}

// |STFT| as (window_len/2 + 1) x frames.
Matrix stft_magnitude(const UnivariateSeries& x, int window_len, int hop) {
  validate_stft(static_cast<int>(x.size()), window_len, hop);
  const int T = static_cast<int>(x.size());
  const int frames = (T - window_len) / hop + 1;
  const int bins = window_len / 2 + 1;
  std::vector<double> window(static_cast<std::size_t>(window_len));
  for (int n = 0; n < window_len; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window_len);
  }
  Matrix mag(bins, frames);
  std::vector<double> frame(static_cast<std::size_t>(window_len));
  for (int f = 0; f < frames; ++f) {
    for (int n = 0; n < window_len; ++n) frame[n] = x.values[f * hop + n] * window[n];
    const auto spectrum = rfft_magnitude(frame);
    for (int k = 0; k < bins; ++k) mag(k, f) = spectrum[k];
  }
  return mag;
}

void stamp(GrayImage& img, int row, int col, int thickness) {
  const int lo = -(thickness - 1) / 2;
  for (int dr = lo; dr < lo + thickness; ++dr) {
    for (int dc = lo; dc < lo + thickness; ++dc) {
      const int r = row + dr;
      const int c = col + dc;
      if (r >= 0 && r < img.height() && c >= 0 && c < img.width()) img(r, c) = 1.0;
    }
  }
}

// Bresenham, all octants.
void draw_line(GrayImage& img, int r0, int c0, int r1, int c1, int thickness) {
  const int dc = std::abs(c1 - c0);
  const int dr = -std::abs(r1 - r0);
  const int sc = c0 < c1 ? 1 : -1;
  const int sr = r0 < r1 ? 1 : -1;
  int err = dc + dr;
  while (true) {
    stamp(img, r0, c0, thickness);
    if (r0 == r1 && c0 == c1) break;
    const int e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      c0 += sc;
    }
    if (e2 <= dc) {
      err += dc;
      r0 += sr;
    }
  }
}

}  // namespace

PeriodEstimate detect_period(const UnivariateSeries& x, int top_k) {
  const int T = static_cast<int>(x.size());
  if (T < 4) fail(ErrorCode::SeriesTooShort, "period detection needs T >= 4, got " + std::to_string(T));
  require(top_k >= 1, ErrorCode::InvalidArgument, "top_k must be >= 1");

  const auto amplitude = rfft_magnitude(x.values);
  const int max_f = T / 2;
  std::vector<int> freqs(static_cast<std::size_t>(max_f));
  std::iota(freqs.begin(), freqs.end(), 1);
  std::stable_sort(freqs.begin(), freqs.end(), [&](int a, int b) {
    if (amplitude[a] != amplitude[b]) return amplitude[a] > amplitude[b];
    return a < b;
  });

  double scale = 0.0;
  for (double v : x.values) scale += std::abs(v);
  PeriodEstimate est;
  est.degenerate = amplitude[freqs.front()] <= 1e-12 * scale;
  if (est.degenerate) {
    est.dominant_frequency = 1;
    est.chosen_L = T;
    est.top_periods = {T};
    est.top_frequencies = {1};
    return est;
  }
  est.dominant_frequency = freqs.front();
  est.chosen_L = (T + est.dominant_frequency - 1) / est.dominant_frequency;
  for (int f : freqs) {
    const int period = (T + f - 1) / f;
    if (std::find(est.top_periods.begin(), est.top_periods.end(), period) != est.top_periods.end()) continue;
    est.top_periods.push_back(period);
    est.top_frequencies.push_back(f);
    if (static_cast<int>(est.top_periods.size()) == top_k) break;
  }
  return est;
}

UvhGeometry uvh_geometry(int length, int L) {
  if (L < 1) fail(ErrorCode::InvalidL, "segment length must be >= 1");
  UvhGeometry g;
  g.columns = (length + L - 1) / L;
  g.padded_length = g.columns * L;
  g.pad = g.padded_length - length;
  return g;
}

GrayImage uvh(const UnivariateSeries& x, int L) {
  require(!x.values.empty(), ErrorCode::EmptyInput, "empty series");
  const int T = static_cast<int>(x.size());
  const UvhGeometry g = uvh_geometry(T, L);
  GrayImage img(L, g.columns);
  for (int i = 0; i < g.padded_length; ++i) {
    const double v = i < g.pad ? x.values.front() : x.values[i - g.pad];
    img(i % L, i / L) = v;
  }
  return img;
}

UnivariateSeries uvh_inverse(const GrayImage& img, int original_length) {
  const int capacity = img.height() * img.width();
  if (original_length < 0 || original_length > capacity) {
    fail(ErrorCode::LengthMismatch, "image holds " + std::to_string(capacity) + " values, requested " +
                                        std::to_string(original_length));
  }
  const int pad = capacity - original_length;
  UnivariateSeries out;
  out.values.resize(static_cast<std::size_t>(original_length));
  for (int i = pad; i < capacity; ++i) out.values[i - pad] = img(i % img.height(), i / img.height());
  return out;
}

GrayImage mvh(const MultivariateSeries& X) { return GrayImage(X.values); }

GafResult gaf(const UnivariateSeries& x) {
  require(!x.values.empty(), ErrorCode::EmptyInput, "empty series");
  const int T = static_cast<int>(x.size());
  GafResult out;
  const auto [lo, hi] = min_max(x.values);
  out.context = {lo, hi};
  out.degenerate = !(hi > lo);
  std::vector<double> scaled(x.size()), sine(x.size());
  for (int i = 0; i < T; ++i) {
    const double s = out.degenerate ? 0.5 : std::clamp((x.values[i] - lo) / (hi - lo), 0.0, 1.0);
    scaled[i] = s;
    sine[i] = std::sqrt(std::max(0.0, 1.0 - s * s));
  }
  out.image = GrayImage(T, T);
  for (int i = 0; i < T; ++i) {
    for (int j = i; j < T; ++j) {
      const double v = std::clamp(scaled[i] * scaled[j] - sine[i] * sine[j], -1.0, 1.0);
      out.image(i, j) = v;
      out.image(j, i) = v;
    }
  }
  return out;
}

UnivariateSeries gaf_diag_inverse(const GrayImage& img, const GafContext& ctx) {
  if (img.height() != img.width()) fail(ErrorCode::NotSquare, "GAF image must be square");
  require(ctx.max >= ctx.min, ErrorCode::InvalidArgument, "GAF context has max < min");
  UnivariateSeries out;
  out.values.resize(static_cast<std::size_t>(img.height()));
  for (int i = 0; i < img.height(); ++i) {
    const double g = std::clamp(img(i, i), -1.0, 1.0);
    const double scaled = std::sqrt((g + 1.0) / 2.0);
    out.values[i] = ctx.min + scaled * (ctx.max - ctx.min);
  }
  return out;
}

GrayImage recurrence_plot(const UnivariateSeries& x, int embed_dim, int delay) {
  require(embed_dim >= 1 && delay >= 1, ErrorCode::InvalidArgument, "embed_dim and delay must be >= 1");
  const int T = static_cast<int>(x.size());
  const int side = T - (embed_dim - 1) * delay;
  if (side < 1) {
    fail(ErrorCode::EmbeddingTooLarge, "embedding of dimension " + std::to_string(embed_dim) +
                                           " with delay " + std::to_string(delay) + " exceeds T");
  }
  GrayImage img(side, side);
  for (int i = 0; i < side; ++i) {
    for (int j = i + 1; j < side; ++j) {
      double sq = 0.0;
      for (int m = 0; m < embed_dim; ++m) {
        const double d = x.values[i + m * delay] - x.values[j + m * delay];
        sq += d * d;
      }
      img(i, j) = img(j, i) = std::sqrt(sq);
    }
  }
  return img;
}

GrayImage stft_spectrogram(const UnivariateSeries& x, int window_len, int hop) {
  Matrix mag = stft_magnitude(x, window_len, hop);
  return GrayImage(mag.array().log1p().matrix());
}

std::vector<double> wavelet_periods(int length, int num_scales) {
  require(num_scales >= 1, ErrorCode::InvalidArgument, "num_scales must be >= 1");
  const double p_min = 2.0;
  const double p_max = std::max(p_min, static_cast<double>(length));
  std::vector<double> periods(static_cast<std::size_t>(num_scales));
  const double octaves = std::log2(p_max / p_min);
  for (int j = 0; j < num_scales; ++j) {
    const double frac = num_scales == 1 ? 0.0 : static_cast<double>(j) / (num_scales - 1);
    periods[j] = p_min * std::exp2(octaves * frac);
  }
  return periods;
}

GrayImage wavelet_scalogram(const UnivariateSeries& x, int num_scales) {
  require(!x.values.empty(), ErrorCode::EmptyInput, "empty series");
  const int T = static_cast<int>(x.size());
  const auto periods = wavelet_periods(T, num_scales);
  const double norm = std::pow(std::numbers::pi, -0.25);
  GrayImage img(num_scales, T);
  for (int j = 0; j < num_scales; ++j) {
    const double scale = periods[j] * kMorletOmega0 / (2.0 * std::numbers::pi);
    const int support = std::min(T - 1, static_cast<int>(std::ceil(5.0 * scale)));
    // conj(psi(u)) / scale for u = m / scale, m in [-support, support]
    std::vector<std::complex<double>> kernel(static_cast<std::size_t>(2 * support + 1));
    for (int m = -support; m <= support; ++m) {
      const double u = m / scale;
      kernel[m + support] =
          std::polar(norm * std::exp(-0.5 * u * u) / scale, -kMorletOmega0 * u);
    }
    for (int t = 0; t < T; ++t) {
      std::complex<double> acc{0.0, 0.0};
      const int n_lo = std::max(0, t - support);
      const int n_hi = std::min(T - 1, t + support);
      for (int n = n_lo; n <= n_hi; ++n) acc += x.values[n] * kernel[n - t + support];
      img(j, t) = std::abs(acc);
    }
  }
  return img;
}

Matrix triangular_filterbank(int n_bins, int n_filters) {
  require(n_filters >= 1, ErrorCode::InvalidArgument, "n_filters must be >= 1");
  require(n_bins >= 1, ErrorCode::InvalidArgument, "n_bins must be >= 1");
  Matrix bank = Matrix::Zero(n_filters, n_bins);
  const double step = static_cast<double>(n_bins - 1) / (n_filters + 1);
  for (int j = 0; j < n_filters; ++j) {
    const double left = j * step;
    const double center = (j + 1) * step;
    const double right = (j + 2) * step;
    for (int b = 0; b < n_bins; ++b) {
      double w = 0.0;
      if (b > left && b <= center) {
        w = (b - left) / (center - left);
      } else if (b > center && b < right) {
        w = (right - b) / (right - center);
      }
      bank(j, b) = w;
    }
    const double total = bank.row(j).sum();
    if (total > 0.0) {
      bank.row(j) /= total;
    } else {
      const int nearest = std::clamp(static_cast<int>(std::lround(center)), 0, n_bins - 1);
      bank(j, nearest) = 1.0;
    }
  }
  return bank;
}

GrayImage filterbank_spectrogram(const UnivariateSeries& x, int window_len, int hop, int n_filters) {
  require(n_filters >= 1, ErrorCode::InvalidArgument, "n_filters must be >= 1");
  const Matrix mag = stft_magnitude(x, window_len, hop);
  const Matrix bank = triangular_filterbank(static_cast<int>(mag.rows()), n_filters);
  return GrayImage((bank * mag).array().log1p().matrix());
}

GrayImage lineplot_raster(const UnivariateSeries& x, int height, int width, int line_thickness) {
  require(height >= 2 && width >= 2, ErrorCode::InvalidArgument, "line plot needs height, width >= 2");
  require(line_thickness >= 1, ErrorCode::InvalidArgument, "line_thickness must be >= 1");
  require(!x.values.empty(), ErrorCode::EmptyInput, "empty series");
  const int T = static_cast<int>(x.size());
  const auto [lo, hi] = min_max(x.values);
  const bool degenerate = !(hi > lo);
  auto row_of = [&](double v) {
    if (degenerate) return (height - 1) / 2;
    return static_cast<int>(std::lround((hi - v) / (hi - lo) * (height - 1)));
  };
  auto col_of = [&](int t) {
    if (T == 1) return 0;
    return static_cast<int>(std::lround(static_cast<double>(t) * (width - 1) / (T - 1)));
  };
  GrayImage img(height, width);
  int prev_r = row_of(x.values[0]);
  int prev_c = col_of(0);
  stamp(img, prev_r, prev_c, line_thickness);
  for (int t = 1; t < T; ++t) {
    const int r = row_of(x.values[t]);
    const int c = col_of(t);
    draw_line(img, prev_r, prev_c, r, c, line_thickness);
    prev_r = r;
    prev_c = c;
  }
  return img;
}

std::string_view to_string(ImagingMethod method) {
  switch (method) {
    case ImagingMethod::LinePlot: return "lineplot";
    case ImagingMethod::MVH: return "mvh";
    case ImagingMethod::UVH: return "uvh";
    case ImagingMethod::STFT: return "stft";
    case ImagingMethod::Wavelet: return "wavelet";
    case ImagingMethod::Filterbank: return "filterbank";
    case ImagingMethod::GAF: return "gaf";
    case ImagingMethod::RP: return "rp";
  }
  return "unknown";
}

std::optional<ImagingMethod> parse_imaging_method(std::string_view name) {
  for (ImagingMethod m : kAllImagingMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool preserves_values(ImagingMethod method) {
  return method == ImagingMethod::UVH || method == ImagingMethod::MVH;
}

GrayImage render_univariate(const UnivariateSeries& x, const ImagingOptions& o) {
  const int T = static_cast<int>(x.size());
  switch (o.method) {
    case ImagingMethod::LinePlot:
      return lineplot_raster(x, o.lineplot_height, o.lineplot_width, o.lineplot_thickness);
    case ImagingMethod::MVH:
      return mvh(MultivariateSeries::from_univariate(x));
    case ImagingMethod::UVH: {
      const int L = o.uvh_period > 0 ? o.uvh_period : detect_period(x).chosen_L;
      return uvh(x, L);
    }
    case ImagingMethod::STFT: {
      const int window = std::min(o.stft_window, T);
      return stft_spectrogram(x, window, o.stft_hop > 0 ? o.stft_hop : std::max(1, window / 2));
    }
    case ImagingMethod::Wavelet:
      return wavelet_scalogram(x, o.wavelet_scales);
    case ImagingMethod::Filterbank: {
      const int window = std::min(o.stft_window, T);
      return filterbank_spectrogram(x, window, o.stft_hop > 0 ? o.stft_hop : std::max(1, window / 2),
                                    o.filterbank_filters);
    }
    case ImagingMethod::GAF:
      return gaf(x).image;
    case ImagingMethod::RP:
      return recurrence_plot(x, o.rp_embed_dim, o.rp_delay);
  }
  fail(ErrorCode::InvalidArgument, "unknown imaging method");
}

std::vector<GrayImage> render(const MultivariateSeries& window, const ImagingOptions& options) {
  if (options.method == ImagingMethod::MVH) return {mvh(window)};
  std::vector<GrayImage> out;
  out.reserve(static_cast<std::size_t>(window.variates()));
  for (int r = 0; r < window.variates(); ++r) out.push_back(render_univariate(window.variate(r), options));
  return out;
}

}  // namespace tsimg
