#include "tsimg/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tsimg/error.hpp"
#include "tsimg/rng.hpp"

namespace tsimg {

MultivariateSeries::MultivariateSeries(Matrix v, std::vector<std::string> names)
    : values(std::move(v)), variate_names(std::move(names)) {
  require(values.rows() >= 1, ErrorCode::ShapeMismatch, "series needs at least one variate");
  require(variate_names.empty() || variate_names.size() == static_cast<std::size_t>(values.rows()),
          ErrorCode::ShapeMismatch, "variate_names length differs from variate count");
}

MultivariateSeries MultivariateSeries::from_univariate(const UnivariateSeries& x) {
  Matrix m(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t t = 0; t < x.size(); ++t) m(0, static_cast<Eigen::Index>(t)) = x.values[t];
  return MultivariateSeries(std::move(m));
}

UnivariateSeries MultivariateSeries::variate(int r) const {
  UnivariateSeries out;
  out.values.resize(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index t = 0; t < values.cols(); ++t) out.values[static_cast<std::size_t>(t)] = values(r, t);
  return out;
}

MultivariateSeries MultivariateSeries::slice(int begin, int count) const {
  require(begin >= 0 && count >= 0 && begin + count <= length(), ErrorCode::ShapeMismatch,
          "slice out of range");
  MultivariateSeries out;
  out.values = values.middleCols(begin, count);
  out.variate_names = variate_names;
  return out;
}

std::vector<WindowSample> slide_windows(const MultivariateSeries& series, int lookback,
                                        int horizon, int stride) {
  require(lookback >= 1, ErrorCode::InvalidArgument, "lookback must be >= 1");
  require(horizon >= 0, ErrorCode::InvalidArgument, "horizon must be >= 0");
  require(stride >= 1, ErrorCode::InvalidArgument, "stride must be >= 1");
  const int T = series.length();
  if (T < lookback + horizon) {
    fail(ErrorCode::EmptyResult, "series length " + std::to_string(T) + " < lookback + horizon (" +
                                     std::to_string(lookback + horizon) + ")");
  }
  const int count = (T - lookback - horizon) / stride + 1;
  std::vector<WindowSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const int start = s * stride;
    WindowSample w;
    w.start = start;
    w.lookback = series.values.middleCols(start, lookback);
    w.target = series.values.middleCols(start + lookback, horizon);
    out.push_back(std::move(w));
  }
  return out;
}

bool SplitStats::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

SplitStats compute_split_stats(const MultivariateSeries& train) {
  require(train.length() >= 1, ErrorCode::EmptyInput, "training split is empty");
  SplitStats stats;
  const int d = train.variates();
  stats.mean.resize(d);
  stats.stddev.resize(d);
  stats.degenerate.resize(d);
  for (int r = 0; r < d; ++r) {
    const auto row = train.values.row(r);
    const double mean = row.mean();
    const double var = (row.array() - mean).square().mean();
    stats.mean[r] = mean;
    stats.stddev[r] = std::sqrt(var);
    stats.degenerate[r] = !(stats.stddev[r] > 0.0);
  }
  return stats;
}

MultivariateSeries apply_standardization(const MultivariateSeries& series, const SplitStats& stats) {
  require(series.variates() == static_cast<int>(stats.mean.size()), ErrorCode::ShapeMismatch,
          "variate count differs from split stats");
  MultivariateSeries out = series;
  for (int r = 0; r < series.variates(); ++r) {
    if (stats.degenerate[r]) {
      out.values.row(r).setZero();
    } else {
      out.values.row(r) = (series.values.row(r).array() - stats.mean[r]) / stats.stddev[r];
    }
  }
  return out;
}

MultivariateSeries invert_standardization(const MultivariateSeries& series, const SplitStats& stats) {
  require(series.variates() == static_cast<int>(stats.mean.size()), ErrorCode::ShapeMismatch,
          "variate count differs from split stats");
  MultivariateSeries out = series;
  for (int r = 0; r < series.variates(); ++r) {
    const double scale = stats.degenerate[r] ? 0.0 : stats.stddev[r];
    out.values.row(r) = series.values.row(r).array() * scale + stats.mean[r];
  }
  return out;
}

StandardizedSplits standardize_by_train(const MultivariateSeries& train,
                                        const MultivariateSeries& val,
                                        const MultivariateSeries& test) {
  require(train.variates() == val.variates() && train.variates() == test.variates(),
          ErrorCode::ShapeMismatch, "splits must share the variate count");
  StandardizedSplits out;
  out.stats = compute_split_stats(train);
  out.train = apply_standardization(train, out.stats);
  out.val = apply_standardization(val, out.stats);
  out.test = apply_standardization(test, out.stats);
  return out;
}

ChronologicalSplit chronological_split(const MultivariateSeries& series, const SplitRatios& ratios,
                                       int context) {
  require(ratios.train > 0 && ratios.val > 0 && ratios.test > 0, ErrorCode::InvalidArgument,
          "split ratios must be positive");
  require(std::abs(ratios.train + ratios.val + ratios.test - 1.0) < 1e-9, ErrorCode::InvalidArgument,
          "split ratios must sum to 1");
  require(context >= 0, ErrorCode::InvalidArgument, "context must be >= 0");
  const int T = series.length();
  const int n_train = static_cast<int>(std::floor(T * ratios.train));
  const int n_val = static_cast<int>(std::floor(T * ratios.val));
  const int n_test = T - n_train - n_val;
  require(n_train >= 1 && n_val >= 1 && n_test >= 1, ErrorCode::TooShort,
          "series too short to split");
  ChronologicalSplit out;
  out.val_context = std::min(context, n_train);
  out.test_context = std::min(context, n_train + n_val);
  out.train = series.slice(0, n_train);
  out.val = series.slice(n_train - out.val_context, n_val + out.val_context);
  out.test = series.slice(n_train + n_val - out.test_context, n_test + out.test_context);
  return out;
}

std::optional<Waveform> parse_waveform(std::string_view name) {
  if (name == "sine") return Waveform::Sine;
  if (name == "sawtooth") return Waveform::Sawtooth;
  if (name == "composite") return Waveform::Composite;
  return std::nullopt;
}

UnivariateSeries gen_periodic(int period, int length, Waveform waveform, std::uint64_t seed,
                              double noise_std) {
  if (period < 1 || period > length) {
    fail(ErrorCode::InvalidPeriod,
         "period " + std::to_string(period) + " outside [1, " + std::to_string(length) + "]");
  }
  require(noise_std >= 0.0, ErrorCode::InvalidArgument, "noise_std must be >= 0");
  std::vector<double> base(static_cast<std::size_t>(period));
  const double w = 2.0 * std::numbers::pi / period;
  for (int t = 0; t < period; ++t) {
    switch (waveform) {
      case Waveform::Sine:
        base[t] = std::sin(w * t);
        break;
      case Waveform::Sawtooth:
        base[t] = 2.0 * static_cast<double>(t) / period - 1.0;
        break;
      case Waveform::Composite:
        base[t] = std::sin(w * t) + 0.5 * std::sin(2.0 * w * t + 0.7) + 0.25 * std::sin(3.0 * w * t + 1.9);
        break;
    }
  }
  UnivariateSeries x;
  x.values.resize(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) x.values[t] = base[t % period];
  if (noise_std > 0.0) {
    Rng rng(seed);
    for (double& v : x.values) v += rng.normal(0.0, noise_std);
  }
  return x;
}

UnivariateSeries gen_ar1(double phi, int length, std::uint64_t seed) {
  if (!(std::abs(phi) < 1.0)) fail(ErrorCode::UnstableCoefficient, "|phi| must be < 1");
  require(length >= 1, ErrorCode::InvalidArgument, "length must be >= 1");
  Rng rng(seed);
  UnivariateSeries x;
  x.values.resize(static_cast<std::size_t>(length));
  x.values[0] = rng.normal() / std::sqrt(1.0 - phi * phi);
  for (int t = 1; t < length; ++t) x.values[t] = phi * x.values[t - 1] + rng.normal();
  return x;
}

}  // namespace tsimg
