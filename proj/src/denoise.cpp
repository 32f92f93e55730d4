#include "speechstd/denoise.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"

namespace speechstd {

void GateParams::validate() const {
  if (fft_size < 2 || !std::has_single_bit(fft_size)) {
    throw Error(ErrorKind::InvalidParams, "fft_size must be a power of two >= 2, got " + std::to_string(fft_size));
  }
  if (hop == 0 || hop > fft_size) {
    throw Error(ErrorKind::InvalidParams, "hop must be in (0, fft_size], got " + std::to_string(hop));
  }
  if (!(prop_decrease >= 0.0 && prop_decrease <= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "prop_decrease must be in [0, 1]");
  }
  if (!std::isfinite(n_std_thresh)) throw Error(ErrorKind::InvalidParams, "n_std_thresh must be finite");
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

std::vector<double> triangular_taps(std::size_t half_width) {
  const std::size_t len = 2 * half_width + 1;
  std::vector<double> taps(len);
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double dist = std::abs(static_cast<double>(i) - static_cast<double>(half_width));
    taps[i] = (static_cast<double>(half_width) + 1.0 - dist) / (static_cast<double>(half_width) + 1.0);
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

NoiseProfile estimate_noise_profile(const AudioSignal& sig, const GateParams& params) {
  return kernels::noise_profile(sig.samples(), params);
}

AudioSignal spectral_gate(const AudioSignal& sig, const NoiseProfile& profile, const GateParams& params) {
  return AudioSignal(kernels::spectral_gate(sig.samples(), profile, params), sig.sample_rate(), sig.source_id());
}

AudioSignal denoise(const AudioSignal& sig, const GateParams& params) {
  params.validate();
  if (static_cast<std::size_t>(sig.size()) < params.fft_size) {
    spdlog::warn("{}: {} samples is shorter than one {}-sample frame; left as is", sig.source_id(), sig.size(),
                 params.fft_size);
    return sig;
  }
  return spectral_gate(sig, estimate_noise_profile(sig, params), params);
}

}  // namespace speechstd
