#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tsimg {

/// Real-input DFT, bins 0..n/2 inclusive (n/2 + 1 values). Any length n >= 1.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Magnitudes |X_f| for f = 0..n/2.
std::vector<double> rfft_magnitude(std::span<const double> x);

}  // namespace tsimg
