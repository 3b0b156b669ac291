#include "tsimg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tsimg/error.hpp"
#include "tsimg/rng.hpp"

namespace tsimg {

namespace {

void check_congruent(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    fail(ErrorCode::ShapeMismatch, "prediction is " + std::to_string(pred.rows()) + "x" +
                                       std::to_string(pred.cols()) + ", truth is " + std::to_string(truth.rows()) +
                                       "x" + std::to_string(truth.cols()));
  }
  require(pred.size() > 0, ErrorCode::EmptyInput, "empty prediction");
}

int gcd(int a, int b) {
  while (b != 0) {
    const int r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

double metric_mse(const Matrix& pred, const Matrix& truth) {
  check_congruent(pred, truth);
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

double metric_mae(const Matrix& pred, const Matrix& truth) {
  check_congruent(pred, truth);
  return (pred - truth).cwiseAbs().sum() / static_cast<double>(pred.size());
}

double metric_accuracy(std::span<const int> preds, std::span<const int> labels) {
  require(preds.size() == labels.size(), ErrorCode::ShapeMismatch, "predictions and labels differ in length");
  if (preds.empty()) fail(ErrorCode::EmptyInput, "no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::string_view to_string(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::SfAll: return "sf-all";
    case PerturbKind::SfHalf: return "sf-half";
    case PerturbKind::ExHalf: return "ex-half";
    case PerturbKind::Masking: return "masking";
  }
  return "unknown";
}

std::optional<PerturbKind> parse_perturb_kind(std::string_view name) {
  for (PerturbKind k : {PerturbKind::SfAll, PerturbKind::SfHalf, PerturbKind::ExHalf, PerturbKind::Masking}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

MultivariateSeries perturb(const MultivariateSeries& series, const PerturbMode& mode) {
  const int T = series.length();
  if (T < 2) fail(ErrorCode::TooShort, "perturbation needs T >= 2");
  Rng rng(mode.seed);
  MultivariateSeries out = series;
  std::vector<int> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), 0);
  switch (mode.kind) {
    case PerturbKind::SfAll:
      rng.shuffle(std::span<int>(order));
      break;
    case PerturbKind::SfHalf:
      rng.shuffle(std::span<int>(order.data(), static_cast<std::size_t>(T / 2)));
      break;
    case PerturbKind::ExHalf: {
      const int first = (T + 1) / 2;
      std::rotate(order.begin(), order.begin() + first, order.end());
      break;
    }
    case PerturbKind::Masking: {
      rng.shuffle(std::span<int>(order));
      for (int i = 0; i < T / 2; ++i) out.values.col(order[i]).setZero();
      return out;
    }
  }
  for (int t = 0; t < T; ++t) out.values.col(t) = series.values.col(order[t]);
  return out;
}

double performance_drop(double base_metric, double perturbed_metric, Better better) {
  if (base_metric == 0.0) fail(ErrorCode::DivByZero, "base metric is zero");
  const double delta = better == Better::Higher ? base_metric - perturbed_metric : perturbed_metric - base_metric;
  return delta / base_metric * 100.0;
}

int reoccurrence_n(int i, int k) {
  if (i < 1 || k < 1) fail(ErrorCode::NonPositive, "i and k must be >= 1");
  return k / gcd(i, k);
}

int reoccurrence_brute_force(int i, int k, int L) {
  if (i < 1 || k < 1 || L < 1) fail(ErrorCode::NonPositive, "i, k and L must be >= 1");
  if ((static_cast<long>(i) * L) % k != 0) {
    fail(ErrorCode::NonIntegerSegment, "segment length i*L/k is not an integer");
  }
  const int seg = i * L / k;
  // Phase-shifted sine, tiled from one period so that x_t == x_{t+L} bitwise.
  // For L >= 3 its smallest exact period is L; L = 1, 2 use a sawtooth ramp.
  std::vector<double> base(static_cast<std::size_t>(L));
  for (int t = 0; t < L; ++t) {
    base[t] = L >= 3 ? std::sin(2.0 * 3.141592653589793 * t / L + 0.25) : static_cast<double>(t);
  }
  const int segments = 2 * k + 2;
  const int length = segments * seg;
  std::vector<double> x(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) x[t] = base[t % L];

  auto segments_match = [&](int a, int b) {
    return std::equal(x.begin() + a * seg, x.begin() + (a + 1) * seg, x.begin() + b * seg);
  };
  for (int n = 1; n < segments; ++n) {
    bool all = true;
    for (int s = 0; s + n < segments && all; ++s) all = segments_match(s, s + n);
    if (all) return n;
  }
  fail(ErrorCode::InvalidArgument, "no reoccurrence within the simulated horizon");
}

int brute_force_period(int k) {
  if (k < 1) fail(ErrorCode::NonPositive, "k must be >= 1");
  return k * ((3 + k - 1) / k);
}

}  // namespace tsimg
