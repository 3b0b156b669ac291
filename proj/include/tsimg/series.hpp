#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsimg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct UnivariateSeries {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// d variates by T time steps; row r is variate r.
struct MultivariateSeries {
  Matrix values;
  std::vector<std::string> variate_names;

  MultivariateSeries() = default;
  explicit MultivariateSeries(Matrix v, std::vector<std::string> names = {});

  static MultivariateSeries from_univariate(const UnivariateSeries& x);

  int variates() const { return static_cast<int>(values.rows()); }
  int length() const { return static_cast<int>(values.cols()); }
  UnivariateSeries variate(int r) const;
  /// Columns [begin, begin + count).
  MultivariateSeries slice(int begin, int count) const;
};

/// One supervised sample. Forecast samples carry `target`, classification
/// samples carry `class_label`; never both.
struct WindowSample {
  Matrix lookback;
  std::optional<Matrix> target;
  std::optional<int> class_label;
  int start = 0;
};

/// Sliding windows over `series`. Sample s covers lookback
/// [s*stride, s*stride + lookback) and target immediately after it.
/// Throws EmptyResult if T < lookback + horizon.
std::vector<WindowSample> slide_windows(const MultivariateSeries& series, int lookback,
                                        int horizon, int stride);

struct SplitStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> degenerate;

  bool any_degenerate() const;
};

struct StandardizedSplits {
  MultivariateSeries train;
  MultivariateSeries val;
  MultivariateSeries test;
  SplitStats stats;
};

SplitStats compute_split_stats(const MultivariateSeries& train);
MultivariateSeries apply_standardization(const MultivariateSeries& series, const SplitStats& stats);
MultivariateSeries invert_standardization(const MultivariateSeries& series, const SplitStats& stats);

/// Per-variate z-score with statistics from `train` only. Zero-variance
/// variates map to zeros and are flagged in the returned stats.
StandardizedSplits standardize_by_train(const MultivariateSeries& train,
                                        const MultivariateSeries& val,
                                        const MultivariateSeries& test);

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct ChronologicalSplit {
  MultivariateSeries train;
  MultivariateSeries val;
  MultivariateSeries test;
  int val_context = 0;   // leading val columns borrowed from train
  int test_context = 0;  // leading test columns borrowed from val
};

/// Chronological split; val and test are prefixed with up to `context` steps
/// of the preceding split so their first windows have a full look-back.
ChronologicalSplit chronological_split(const MultivariateSeries& series, const SplitRatios& ratios,
                                       int context);

enum class Waveform { Sine, Sawtooth, Composite };

std::optional<Waveform> parse_waveform(std::string_view name);

/// Exactly periodic signal (the base period is computed once and tiled),
/// plus optional Gaussian noise drawn from `seed`.
UnivariateSeries gen_periodic(int period, int length, Waveform waveform, std::uint64_t seed,
                              double noise_std);

/// AR(1) process with unit-variance Gaussian innovations, started from the
/// stationary distribution.
UnivariateSeries gen_ar1(double phi, int length, std::uint64_t seed);

}  // namespace tsimg
