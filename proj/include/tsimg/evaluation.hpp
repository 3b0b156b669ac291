#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "tsimg/series.hpp"

namespace tsimg {

double metric_mse(const Matrix& pred, const Matrix& truth);
double metric_mae(const Matrix& pred, const Matrix& truth);
double metric_accuracy(std::span<const int> preds, std::span<const int> labels);

enum class PerturbKind { SfAll, SfHalf, ExHalf, Masking };

struct PerturbMode {
  PerturbKind kind = PerturbKind::SfAll;
  std::uint64_t seed = 0;
};

std::string_view to_string(PerturbKind kind);
std::optional<PerturbKind> parse_perturb_kind(std::string_view name);

/// Temporal-order perturbation applied jointly to all variates.
///   SfAll   one random permutation of all time indices
///   SfHalf  random permutation of the first floor(T/2) indices
///   ExHalf  swap halves; the first half holds ceil(T/2) steps
///   Masking zero floor(T/2) distinct time indices
MultivariateSeries perturb(const MultivariateSeries& series, const PerturbMode& mode);

enum class Better { Higher, Lower };

/// Relative degradation in percent, direction-aware.
double performance_drop(double base_metric, double perturbed_metric, Better better);

/// Segments of length (i/k)L in a series with period L first recur after
/// k / gcd(i, k) segments.
int reoccurrence_n(int i, int k);

/// Simulation of the same quantity: cuts an exactly L-periodic series into
/// (i/k)L-length segments and finds the smallest shift n at which every
/// segment equals the one n positions later. Requires (i * L) mod k == 0.
int reoccurrence_brute_force(int i, int k, int L);

/// Smallest multiple of k that is >= 3, so the simulated sine has an
/// unambiguous period and every segment length is an integer.
int brute_force_period(int k);

}  // namespace tsimg
