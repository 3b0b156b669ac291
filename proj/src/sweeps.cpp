#include "tsimg/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <thread>

#include "tsimg/error.hpp"
#include "tsimg/rng.hpp"

namespace tsimg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs cell(0..n-1) on up to `jobs` threads. The first failure (by cell
// index) is rethrown after all workers finish.
void run_cells(std::size_t n, int jobs, const std::function<void(std::size_t)>& cell) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        cell(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void normalize(SweepResult& result) {
  if (result.points.empty()) return;
  double lo = result.points.front().mse;
  double hi = lo;
  for (const SweepPoint& p : result.points) {
    lo = std::min(lo, p.mse);
    hi = std::max(hi, p.mse);
  }
  for (SweepPoint& p : result.points) p.normalized_mse = hi > lo ? (p.mse - lo) / (hi - lo) : 0.0;
}

std::vector<int> sorted_unique(std::span<const int> values, const char* what) {
  std::vector<int> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    fail(ErrorCode::InvalidArgument, std::string("duplicate ") + what + " in sweep");
  }
  require(!out.empty(), ErrorCode::EmptyInput, std::string("no ") + what + " to sweep");
  return out;
}

}  // namespace

StandardizedSplits prepare_forecast_splits(const MultivariateSeries& series, const SplitRatios& ratios,
                                           int lookback) {
  const ChronologicalSplit split = chronological_split(series, ratios, lookback);
  return standardize_by_train(split.train, split.val, split.test);
}

ExperimentResult run_forecast_experiment(const MultivariateSeries& series, const ForecastExperiment& experiment) {
  ExperimentResult result;
  result.splits = prepare_forecast_splits(series, experiment.ratios, experiment.pipeline.lookback);
  PipelineConfig pipe = experiment.pipeline;
  pipe.model = resolve_forecast_model(pipe, series.variates());
  result.model = pipe.model;

  const std::vector<ForecastItem> train_items = build_forecast_items(result.splits.train, pipe, pipe.stride);
  const std::vector<ForecastItem> val_items = build_forecast_items(result.splits.val, pipe, pipe.eval_stride);
  const std::vector<Example> train_examples = examples_of(train_items);
  result.train_items = train_examples.size();

  const auto started = Clock::now();
  result.trained = train(pipe.model, train_examples, forecast_validation(val_items, pipe.model), experiment.train);
  result.train_seconds = seconds_since(started);

  const std::vector<ForecastItem> test_items = build_forecast_items(result.splits.test, pipe, pipe.eval_stride);
  result.test = evaluate_forecast(test_items, result.trained.params, pipe.model);
  return result;
}

SweepResult segment_sweep(const MultivariateSeries& series, const ForecastExperiment& base, int L, int k,
                          std::span<const int> i_values, int jobs) {
  require(base.pipeline.imaging.method == ImagingMethod::UVH, ErrorCode::InvalidArgument,
          "segment sweeps need UVH imaging");
  if (L < 1 || k < 1) fail(ErrorCode::NonPositive, "L and k must be >= 1");
  const std::vector<int> is = sorted_unique(i_values, "segment multipliers");
  for (int i : is) {
    if (i < 1) fail(ErrorCode::NonPositive, "segment multipliers must be >= 1");
    if ((static_cast<long>(i) * L) % k != 0) {
      fail(ErrorCode::NonIntegerSegment, "segment length " + std::to_string(i) + "*" + std::to_string(L) + "/" +
                                             std::to_string(k) + " is not an integer");
    }
  }

  SweepResult result;
  result.kind = "segment";
  result.points.resize(is.size());
  run_cells(is.size(), jobs, [&](std::size_t c) {
    const auto started = Clock::now();
    ForecastExperiment cell = base;
    cell.pipeline.imaging.uvh_period = is[c] * L / k;
    cell.train.seed = derive_seed(base.train.seed, c);
    const ExperimentResult r = run_forecast_experiment(series, cell);
    SweepPoint& p = result.points[c];
    p.axis = cell.pipeline.imaging.uvh_period;
    p.mse = r.test.mse;
    p.mae = r.test.mae;
    p.n_value = reoccurrence_n(is[c], k);
    p.seconds = seconds_since(started);
  });
  normalize(result);

  const auto at = [&](int i) -> const SweepPoint* {
    const auto it = std::find(is.begin(), is.end(), i);
    return it == is.end() ? nullptr : &result.points[static_cast<std::size_t>(it - is.begin())];
  };
  const SweepPoint* one = at(k);
  const SweepPoint* two = at(2 * k);
  if (one != nullptr && two != nullptr) {
    result.zero_length_mse = (one->mse + two->mse) / 2.0;
    result.zero_length_normalized = (one->normalized_mse + two->normalized_mse) / 2.0;
  }
  return result;
}

SweepResult lookback_sweep(const MultivariateSeries& series, const ForecastExperiment& base,
                           std::span<const int> lengths, int jobs) {
  const std::vector<int> sorted = sorted_unique(lengths, "look-back lengths");
  SweepResult result;
  result.kind = "lookback";
  std::vector<int> runnable;
  const int horizon = base.pipeline.horizon;
  for (int len : sorted) {
    if (len < 1) fail(ErrorCode::NonPositive, "look-back lengths must be >= 1");
    const int train_len = static_cast<int>(static_cast<double>(series.length()) * base.ratios.train);
    if (len + horizon > series.length()) {
      result.skipped.push_back({len, "look-back " + std::to_string(len) + " + horizon " + std::to_string(horizon) +
                                         " exceeds series length " + std::to_string(series.length())});
    } else if (len + horizon > train_len) {
      result.skipped.push_back({len, "look-back " + std::to_string(len) + " + horizon " + std::to_string(horizon) +
                                         " exceeds the " + std::to_string(train_len) + "-step training split"});
    } else {
      runnable.push_back(len);
    }
  }

  result.points.resize(runnable.size());
  run_cells(runnable.size(), jobs, [&](std::size_t c) {
    const auto started = Clock::now();
    ForecastExperiment cell = base;
    cell.pipeline.lookback = runnable[c];
    cell.train.seed = derive_seed(base.train.seed, c);
    const ExperimentResult r = run_forecast_experiment(series, cell);
    SweepPoint& p = result.points[c];
    p.axis = runnable[c];
    p.mse = r.test.mse;
    p.mae = r.test.mae;
    p.seconds = seconds_since(started);
  });
  normalize(result);
  return result;
}

TimingReport measure_costs(const MultivariateSeries& series, const ForecastExperiment& experiment) {
  const ExperimentResult r = run_forecast_experiment(series, experiment);
  TimingReport report;
  report.trainable_param_count = r.trained.params.scalar_count();
  report.train_minutes = r.train_seconds / 60.0;

  PipelineConfig pipe = experiment.pipeline;
  pipe.model = r.model;
  const auto started = Clock::now();
  const std::vector<ForecastItem> items = build_forecast_items(r.splits.test, pipe, pipe.eval_stride);
  for (const ForecastItem& item : items) (void)predict(item, r.trained.params, r.model);
  report.inference_ms_per_sample = seconds_since(started) * 1000.0 / static_cast<double>(items.size());
  return report;
}

}  // namespace tsimg
