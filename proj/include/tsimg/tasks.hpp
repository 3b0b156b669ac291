#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tsimg/evaluation.hpp"
#include "tsimg/forecasting.hpp"
#include "tsimg/training.hpp"

namespace tsimg {

/// Everything needed to turn a series split into model examples.
struct PipelineConfig {
  ModelConfig model;
  ImagingOptions imaging;
  int lookback = 96;
  int horizon = 96;
  int stride = 1;       // training windows
  int eval_stride = 1;  // validation and test windows

  /// Checks window sizes, model shape and task/imaging routing.
  void validate() const;
};

/// Fills model fields implied by the data (horizon, channel count, inputs)
/// for a d-variate forecasting series.
ModelConfig resolve_forecast_model(const PipelineConfig& pipeline, int variates);

/// One forecast unit: a single variate, or all variates for MVH.
struct ForecastItem {
  Example example;
  Matrix truth;                     // channels x T', split units
  Vector norm_mean;                 // per channel (forecast-linear)
  Vector norm_scale;                // per channel (forecast-linear)
  std::optional<ReconstructionFrame> frame;  // forecast-reconstruct
  int window = 0;
};

/// Slides windows over `split` and images each look-back. Perturbations are
/// applied in order to every look-back (never to the truth), each window with
/// a seed derived from the mode's seed and the window index.
std::vector<ForecastItem> build_forecast_items(const MultivariateSeries& split, const PipelineConfig& pipeline,
                                               int stride, std::span<const PerturbMode> perturbations = {});

std::vector<Example> examples_of(const std::vector<ForecastItem>& items);

/// Forecast for one item in split units (channels x T').
Matrix predict(const ForecastItem& item, const ParamSet& params, const ModelConfig& model);

struct ForecastMetrics {
  double mse = 0.0;
  double mae = 0.0;
  long samples = 0;  // scalar predictions averaged
};

ForecastMetrics evaluate_forecast(std::span<const ForecastItem> items, const ParamSet& params,
                                  const ModelConfig& model);

/// Minimizes forecast MSE (split units) over `items`.
ValidationMetric forecast_validation(std::span<const ForecastItem> items, const ModelConfig& model);

/// Images each sample's look-back (one image per variate, one for MVH).
std::vector<Example> build_classify_examples(std::span<const WindowSample> samples, const ImagingOptions& imaging,
                                             int image_size, int patch_size,
                                             std::span<const PerturbMode> perturbations = {});

std::vector<int> predict_classes(std::span<const Example> examples, const ParamSet& params, const ModelConfig& model);

double evaluate_accuracy(std::span<const Example> examples, const ParamSet& params, const ModelConfig& model);

}  // namespace tsimg
