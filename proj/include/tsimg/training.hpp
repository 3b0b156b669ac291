#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tsimg/models.hpp"

namespace tsimg {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 32;
  int max_epochs = 20;
  int patience = 3;
  bool early_stopping = true;
  std::uint64_t seed = 0;

  /// Defaults per task: 30 epochs / patience 8 for classification,
  /// 20 epochs / patience 3 for forecasting.
  static TrainConfig for_task(Task task);
  void validate() const;
};

struct AdamState {
  long step = 0;
  ParamSet m;
  ParamSet v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update, in place. Initializes the moments on first use.
void adam_step(ParamSet& params, const GradSet& grads, AdamState& state, double learning_rate);

/// -log softmax(logits)[label], computed with max subtraction.
double cross_entropy(const Vector& logits, int label);

/// Mean squared error over the masked patch rows only. Throws EmptyMask.
double masked_mse(const Matrix& pred_patches, const Matrix& target_patches, const ForecastMask& mask);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double seconds = 0.0;
};

struct History {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; parameters returned by train() come from here
};

enum class MetricDirection { Maximize, Minimize };

struct ValidationMetric {
  std::function<double(const ParamSet&)> evaluate;
  MetricDirection direction = MetricDirection::Minimize;
};

struct TrainResult {
  ParamSet params;
  History history;
};

/// Mini-batch Adam with per-epoch seeded shuffling, validation after every
/// epoch, early stopping after `patience` non-improving epochs, and
/// restoration of the best-validation parameters.
TrainResult train(const ModelConfig& model, std::span<const Example> train_data, const ValidationMetric& metric,
                  const TrainConfig& cfg);

/// Same loop; validation is accuracy (classification) or mean loss (forecasting)
/// over `val_data`.
TrainResult train(const ModelConfig& model, std::span<const Example> train_data, std::span<const Example> val_data,
                  const TrainConfig& cfg);

}  // namespace tsimg
