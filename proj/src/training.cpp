#include "tsimg/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "tsimg/error.hpp"
#include "tsimg/rng.hpp"

namespace tsimg {

TrainConfig TrainConfig::for_task(Task task) {
  TrainConfig cfg;
  if (task == Task::Classify) {
    cfg.max_epochs = 30;
    cfg.patience = 8;
  } else {
    cfg.max_epochs = 20;
    cfg.patience = 3;
  }
  return cfg;
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0, ErrorCode::InvalidArgument, "learning_rate must be >= 0");
  require(batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be >= 1");
  require(max_epochs >= 1, ErrorCode::InvalidArgument, "max_epochs must be >= 1");
  require(patience >= 1, ErrorCode::InvalidArgument, "patience must be >= 1");
}

void adam_step(ParamSet& params, const GradSet& grads, AdamState& state, double learning_rate) {
  if (!params.congruent_with(grads)) fail(ErrorCode::ShapeMismatch, "gradients do not match parameters");
  if (state.step == 0 && state.m.tensor_count() == 0) {
    state.m = params.zeros_like();
    state.v = params.zeros_like();
  }
  if (!state.m.congruent_with(params) || !state.v.congruent_with(params)) {
    fail(ErrorCode::ShapeMismatch, "Adam moments do not match parameters");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto m_it = state.m.begin();
  auto v_it = state.v.begin();
  auto g_it = grads.begin();
  for (auto p_it = params.begin(); p_it != params.end(); ++p_it, ++m_it, ++v_it, ++g_it) {
    Matrix& m = m_it->second;
    Matrix& v = v_it->second;
    const Matrix& g = g_it->second;
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p_it->second.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  }
}

double cross_entropy(const Vector& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    fail(ErrorCode::LabelOutOfRange,
         "label " + std::to_string(label) + " outside [0, " + std::to_string(logits.size()) + ")");
  }
  const double top = logits.maxCoeff();
  const double log_sum = top + std::log((logits.array() - top).exp().sum());
  return log_sum - logits(label);
}

double masked_mse(const Matrix& pred_patches, const Matrix& target_patches, const ForecastMask& mask) {
  if (pred_patches.rows() != target_patches.rows() || pred_patches.cols() != target_patches.cols()) {
    fail(ErrorCode::ShapeMismatch, "prediction and target patches differ in shape");
  }
  if (mask.masked_patch_indices.empty()) fail(ErrorCode::EmptyMask, "reconstruction needs at least one masked patch");
  double total = 0.0;
  for (int idx : mask.masked_patch_indices) {
    require(idx >= 0 && idx < pred_patches.rows(), ErrorCode::ShapeMismatch, "mask index out of range");
    total += (pred_patches.row(idx) - target_patches.row(idx)).squaredNorm();
  }
  return total / (static_cast<double>(mask.masked_patch_indices.size()) * pred_patches.cols());
}

TrainResult train(const ModelConfig& model, std::span<const Example> train_data, const ValidationMetric& metric,
                  const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  require(!train_data.empty(), ErrorCode::EmptyInput, "training set is empty");
  require(static_cast<bool>(metric.evaluate), ErrorCode::InvalidArgument, "missing validation metric");

  const LossKind kind = loss_kind_for(model.task);
  ParamSet params = init_params(model, cfg.seed);
  AdamState adam;
  Rng shuffler(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.params = params;
  double best = 0.0;
  int stale = 0;
  std::vector<Example> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffler.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(train_data[order[i]]);
      LossAndGrad lg = backward(kind, batch, params, model);
      adam_step(params, lg.grads, adam, cfg.learning_rate);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      seen += batch.size();
    }
    const double value = metric.evaluate(params);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.epochs.push_back({epoch, loss_sum / static_cast<double>(seen), value, seconds});

    const bool improved = epoch == 1 || (metric.direction == MetricDirection::Maximize ? value > best : value < best);
    if (improved) {
      best = value;
      stale = 0;
      result.params = params;
      result.history.best_epoch = epoch;
    } else if (++stale >= cfg.patience && cfg.early_stopping) {
      break;
    }
  }
  return result;
}

TrainResult train(const ModelConfig& model, std::span<const Example> train_data, std::span<const Example> val_data,
                  const TrainConfig& cfg) {
  require(!val_data.empty(), ErrorCode::EmptyInput, "validation set is empty");
  ValidationMetric metric;
  if (model.task == Task::Classify) {
    metric.direction = MetricDirection::Maximize;
    metric.evaluate = [&model, val_data](const ParamSet& p) {
      std::size_t correct = 0;
      for (const Example& ex : val_data) {
        std::vector<Matrix> tokens;
        for (const auto& seq : ex.inputs) tokens.push_back(forward_encoder(seq, p, model));
        if (argmax_class(forward_classify(tokens, p)) == ex.label) ++correct;
      }
      return static_cast<double>(correct) / static_cast<double>(val_data.size());
    };
  } else {
    metric.direction = MetricDirection::Minimize;
    metric.evaluate = [&model, val_data](const ParamSet& p) {
      return compute_loss(loss_kind_for(model.task), val_data, p, model);
    };
  }
  return train(model, train_data, metric, cfg);
}

}  // namespace tsimg
