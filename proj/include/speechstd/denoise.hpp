#pragma once

#include <cstddef>
#include <vector>

#include "speechstd/audio.hpp"

namespace speechstd {

struct GateParams {
  std::size_t fft_size = 1024;
  std::size_t hop = 256;
  double n_std_thresh = 1.5;
  double prop_decrease = 1.0;
  std::size_t smoothing_bins = 4;
  std::size_t smoothing_frames = 4;

  std::size_t bins() const { return fft_size / 2 + 1; }
  // Throws InvalidParams.
  void validate() const;
};

// Per-bin noise floor estimate in linear magnitude.
struct NoiseProfile {
  std::size_t fft_size = 0;
  std::vector<double> mean_mag;
  std::vector<double> std_mag;
  std::size_t frames = 0;
};

// Profile from every full frame of `sig`. Throws TooShort if len < fft_size.
NoiseProfile estimate_noise_profile(const AudioSignal& sig, const GateParams& params = {});

// Throws ProfileMismatch if the profile was built with a different fft_size.
AudioSignal spectral_gate(const AudioSignal& sig, const NoiseProfile& profile,
                          const GateParams& params = {});

// Stationary mode: profile estimated from the clip itself, then gated.
// Clips shorter than one frame are returned unchanged.
AudioSignal denoise(const AudioSignal& sig, const GateParams& params = {});

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Normalized triangular smoothing taps of length 2*half_width + 1.
std::vector<double> triangular_taps(std::size_t half_width);

}  // namespace speechstd
