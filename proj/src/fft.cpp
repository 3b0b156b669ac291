#include "tsimg/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace tsimg {

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  if (x.empty()) return {};
  // Eigen's kissfft backend crashes on length 1.
  if (x.size() == 1) return {std::complex<double>(x[0], 0.0)};
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> input(x.begin(), x.end());
  std::vector<std::complex<double>> out;
  fft.fwd(out, input);
  out.resize(x.size() / 2 + 1);
  return out;
}

std::vector<double> rfft_magnitude(std::span<const double> x) {
  const auto spectrum = rfft(x);
  std::vector<double> mag(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) mag[i] = std::abs(spectrum[i]);
  return mag;
}

}  // namespace tsimg
