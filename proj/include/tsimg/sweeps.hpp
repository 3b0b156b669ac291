#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsimg/tasks.hpp"

namespace tsimg {

struct ForecastExperiment {
  PipelineConfig pipeline;
  TrainConfig train;
  SplitRatios ratios;
};

struct ExperimentResult {
  ModelConfig model;  // resolved for the data
  TrainResult trained;
  ForecastMetrics test;
  StandardizedSplits splits;
  std::size_t train_items = 0;
  double train_seconds = 0.0;
};

/// Chronological split (val/test borrow `lookback` steps of context), then
/// per-variate z-scoring with train statistics.
StandardizedSplits prepare_forecast_splits(const MultivariateSeries& series, const SplitRatios& ratios,
                                           int lookback);

/// Trains on the train split (early stopping on validation MSE) and scores
/// the test split in standardized units.
ExperimentResult run_forecast_experiment(const MultivariateSeries& series, const ForecastExperiment& experiment);

struct SweepPoint {
  int axis = 0;  // segment length or look-back length
  double mse = 0.0;
  double mae = 0.0;
  double normalized_mse = 0.0;  // min-max over the sweep
  int n_value = 0;              // segment sweeps only
  double seconds = 0.0;
};

struct SweepSkip {
  int axis = 0;
  std::string reason;
};

struct SweepResult {
  std::string kind;
  std::vector<SweepPoint> points;  // strictly increasing axis
  std::vector<SweepSkip> skipped;
  /// Segment sweeps with both L and 2L: average of their MSEs, plotted at length 0.
  std::optional<double> zero_length_mse;
  std::optional<double> zero_length_normalized;
};

/// One framework-(d) run per segment length (i/k)L over UVH images. Cell c
/// trains with seed derive_seed(train.seed, c). `jobs` > 1 runs cells on
/// worker threads; results do not depend on it.
SweepResult segment_sweep(const MultivariateSeries& series, const ForecastExperiment& base, int L, int k,
                          std::span<const int> i_values, int jobs = 1);

inline constexpr int kDefaultLookbacks[] = {48, 96, 192, 336, 720, 1152, 1728, 2304};

/// One run per look-back length; lengths the data cannot support are skipped
/// with a reason.
SweepResult lookback_sweep(const MultivariateSeries& series, const ForecastExperiment& base,
                           std::span<const int> lengths, int jobs = 1);

struct TimingReport {
  std::size_t trainable_param_count = 0;
  double train_minutes = 0.0;
  double inference_ms_per_sample = 0.0;  // imaging included
};

TimingReport measure_costs(const MultivariateSeries& series, const ForecastExperiment& experiment);

}  // namespace tsimg
