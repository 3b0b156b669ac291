#include "tsimg/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "tsimg/error.hpp"
#include "tsimg/rng.hpp"

namespace tsimg {

namespace {

constexpr double kFlatStd = 1e-12;

UnivariateSeries row_series(const Matrix& m, int r) {
  UnivariateSeries x;
  x.values.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.cols(); ++t) x.values[static_cast<std::size_t>(t)] = m(r, t);
  return x;
}

MultivariateSeries apply_perturbations(const Matrix& lookback, std::span<const PerturbMode> perturbations,
                                       int window) {
  MultivariateSeries m(lookback);
  for (const PerturbMode& p : perturbations) {
    m = perturb(m, {p.kind, derive_seed(p.seed, static_cast<std::uint64_t>(window))});
  }
  return m;
}

// Per-row mean and population std of the look-back; flat rows get scale 1.
void instance_stats(const Matrix& lookback, Vector& mean, Vector& scale) {
  mean = lookback.rowwise().mean();
  scale.resize(lookback.rows());
  for (Eigen::Index r = 0; r < lookback.rows(); ++r) {
    const double sd = std::sqrt((lookback.row(r).array() - mean(r)).square().mean());
    scale(r) = sd > kFlatStd ? sd : 1.0;
  }
}

Matrix normalize_rows(const Matrix& m, const Vector& mean, const Vector& scale) {
  return ((m.colwise() - mean).array().colwise() / scale.array()).matrix();
}

PatchSequence image_patches(const GrayImage& img, int image_size, int patch_size) {
  return align_image(img, image_size, patch_size).patches;
}

void add_linear_items(std::vector<ForecastItem>& out, const Matrix& lookback, const Matrix& truth,
                      const PipelineConfig& pipe, int window) {
  const int S = pipe.model.image_size;
  const int P = pipe.model.patch_size;
  const int horizon = pipe.horizon;
  auto make_item = [&](const Matrix& tr, const GrayImage& img, const Vector& mean,
                       const Vector& scale) {
    ForecastItem item;
    item.window = window;
    item.truth = tr;
    item.norm_mean = mean;
    item.norm_scale = scale;
    item.example.inputs.push_back(image_patches(img, S, P));
    const Matrix normalized = normalize_rows(tr, mean, scale);
    item.example.target.resize(normalized.size());
    for (Eigen::Index c = 0; c < normalized.rows(); ++c) {
      for (int t = 0; t < horizon; ++t) item.example.target(c * horizon + t) = normalized(c, t);
    }
    out.push_back(std::move(item));
  };

  if (pipe.imaging.method == ImagingMethod::MVH) {
    Vector mean, scale;
    instance_stats(lookback, mean, scale);
    const MultivariateSeries normalized(normalize_rows(lookback, mean, scale));
    make_item(truth, render(normalized, pipe.imaging).front(), mean, scale);
    return;
  }
  for (Eigen::Index r = 0; r < lookback.rows(); ++r) {
    const Matrix lb = lookback.row(r);
    Vector mean, scale;
    instance_stats(lb, mean, scale);
    const UnivariateSeries x = row_series(normalize_rows(lb, mean, scale), 0);
    make_item(truth.row(r), render_univariate(x, pipe.imaging), mean, scale);
  }
}

void add_reconstruct_items(std::vector<ForecastItem>& out, const MultivariateSeries& split, const Matrix& lookback,
                           const Matrix& truth, int future_begin, const PipelineConfig& pipe, int window) {
  const int S = pipe.model.image_size;
  const int P = pipe.model.patch_size;
  auto finish = [&](ReconstructionFrame frame, const Matrix& lb, const Matrix& tr, const Matrix& future) {
    ForecastItem item;
    item.window = window;
    item.truth = tr;
    item.example.inputs.push_back(frame.input);
    item.example.mask = frame.mask;
    item.example.target_patches = frame_target_patches(frame, lb, future);
    item.frame = std::move(frame);
    out.push_back(std::move(item));
  };

  if (pipe.imaging.method == ImagingMethod::MVH) {
    finish(prepare_mvh_frame(lookback, pipe.horizon, S, P), lookback, truth, truth);
    return;
  }
  for (Eigen::Index r = 0; r < lookback.rows(); ++r) {
    const UnivariateSeries x = row_series(lookback, static_cast<int>(r));
    const int L = pipe.imaging.uvh_period > 0 ? pipe.imaging.uvh_period : detect_period(x).chosen_L;
    ReconstructionFrame frame = prepare_uvh_frame(x.values, L, pipe.horizon, S, P);
    // Real continuation where the split has it; the frame extends it periodically otherwise.
    const int available = std::min(frame.horizon_extent(), split.length() - future_begin);
    const Matrix future = split.values.block(r, future_begin, 1, available);
    finish(std::move(frame), lookback.row(r), truth.row(r), future);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  require(lookback >= 1, ErrorCode::InvalidArgument, "lookback must be >= 1");
  require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  require(stride >= 1 && eval_stride >= 1, ErrorCode::InvalidArgument, "stride must be >= 1");
  model.validate();
  validate_routing(model.task, model.arch, imaging.method);
}

ModelConfig resolve_forecast_model(const PipelineConfig& pipeline, int variates) {
  require(pipeline.model.task != Task::Classify, ErrorCode::InvalidArgument, "not a forecasting task");
  ModelConfig m = pipeline.model;
  m.horizon = pipeline.horizon;
  m.num_inputs = 1;
  m.output_channels =
      (pipeline.imaging.method == ImagingMethod::MVH && m.task == Task::ForecastLinear) ? variates : 1;
  return m;
}

std::vector<ForecastItem> build_forecast_items(const MultivariateSeries& split, const PipelineConfig& pipeline,
                                               int stride, std::span<const PerturbMode> perturbations) {
  pipeline.validate();
  require(pipeline.model.task != Task::Classify, ErrorCode::InvalidArgument, "not a forecasting task");
  const std::vector<WindowSample> windows = slide_windows(split, pipeline.lookback, pipeline.horizon, stride);
  std::vector<ForecastItem> items;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const int window = static_cast<int>(w);
    const Matrix lookback = apply_perturbations(windows[w].lookback, perturbations, window).values;
    const Matrix& truth = *windows[w].target;
    if (pipeline.model.task == Task::ForecastLinear) {
      add_linear_items(items, lookback, truth, pipeline, window);
    } else {
      add_reconstruct_items(items, split, lookback, truth, windows[w].start + pipeline.lookback, pipeline, window);
    }
  }
  return items;
}

std::vector<Example> examples_of(const std::vector<ForecastItem>& items) {
  std::vector<Example> out;
  out.reserve(items.size());
  for (const ForecastItem& item : items) out.push_back(item.example);
  return out;
}

Matrix predict(const ForecastItem& item, const ParamSet& params, const ModelConfig& model) {
  require(item.example.inputs.size() == 1, ErrorCode::ShapeMismatch, "forecast items carry one image");
  if (model.task == Task::ForecastReconstruct) {
    require(item.frame.has_value(), ErrorCode::InvalidArgument, "item was not built for reconstruction");
    const PatchSequence recon = forward_reconstruct(item.example.inputs.front(), item.example.mask, params, model);
    return recover_forecast(*item.frame, recon);
  }
  require(model.task == Task::ForecastLinear, ErrorCode::InvalidArgument, "not a forecasting model");
  const Matrix tokens = forward_encoder(item.example.inputs.front(), params, model);
  const Vector out = forward_forecast_linear(tokens, params, model.horizon * model.output_channels);
  const int channels = static_cast<int>(item.truth.rows());
  require(channels == model.output_channels, ErrorCode::ShapeMismatch, "channel count differs from the model");
  Matrix pred(channels, model.horizon);
  for (int c = 0; c < channels; ++c) {
    for (int t = 0; t < model.horizon; ++t) {
      pred(c, t) = out(c * model.horizon + t) * item.norm_scale(c) + item.norm_mean(c);
    }
  }
  return pred;
}

ForecastMetrics evaluate_forecast(std::span<const ForecastItem> items, const ParamSet& params,
                                  const ModelConfig& model) {
  require(!items.empty(), ErrorCode::EmptyInput, "no forecast items");
  double sq = 0.0;
  double abs = 0.0;
  long n = 0;
  for (const ForecastItem& item : items) {
    const Matrix diff = predict(item, params, model) - item.truth;
    sq += diff.squaredNorm();
    abs += diff.cwiseAbs().sum();
    n += static_cast<long>(diff.size());
  }
  return {sq / static_cast<double>(n), abs / static_cast<double>(n), n};
}

ValidationMetric forecast_validation(std::span<const ForecastItem> items, const ModelConfig& model) {
  ValidationMetric metric;
  metric.direction = MetricDirection::Minimize;
  metric.evaluate = [items, model](const ParamSet& p) { return evaluate_forecast(items, p, model).mse; };
  return metric;
}

std::vector<Example> build_classify_examples(std::span<const WindowSample> samples, const ImagingOptions& imaging,
                                             int image_size, int patch_size,
                                             std::span<const PerturbMode> perturbations) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    require(samples[s].class_label.has_value(), ErrorCode::InvalidArgument,
            "sample " + std::to_string(s) + " has no class label");
    const MultivariateSeries window = apply_perturbations(samples[s].lookback, perturbations, static_cast<int>(s));
    Example ex;
    ex.label = *samples[s].class_label;
    for (const GrayImage& img : render(window, imaging)) ex.inputs.push_back(image_patches(img, image_size, patch_size));
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<int> predict_classes(std::span<const Example> examples, const ParamSet& params, const ModelConfig& model) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) {
    std::vector<Matrix> tokens;
    for (const PatchSequence& seq : ex.inputs) tokens.push_back(forward_encoder(seq, params, model));
    out.push_back(argmax_class(forward_classify(tokens, params)));
  }
  return out;
}

double evaluate_accuracy(std::span<const Example> examples, const ParamSet& params, const ModelConfig& model) {
  const std::vector<int> preds = predict_classes(examples, params, model);
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const Example& ex : examples) labels.push_back(ex.label);
  return metric_accuracy(preds, labels);
}

}  // namespace tsimg
