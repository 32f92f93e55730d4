#pragma once

// Data-parallel kernels (OpenMP) and the serial reference implementations
// they are tested and benchmarked against.
//
// Every parallel kernel is deterministic: each output element is computed
// by exactly one thread in a fixed order, so results do not depend on the
// thread count.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "speechstd/denoise.hpp"
#include "speechstd/metrics.hpp"

namespace speechstd {

// Windowed-sinc resampler design shared by the kernel and the reference.
struct ResamplerDesign {
  static constexpr int kTaps = 64;
  static constexpr double kKaiserBeta = 8.0;

  int in_rate = 0;
  int out_rate = 0;
  std::int64_t up = 1;    // output-rate factor after gcd reduction
  std::int64_t down = 1;  // input-rate factor after gcd reduction
  double cutoff_hz = 0.0;

  static ResamplerDesign make(int in_rate, int out_rate);

  // Normalized cutoff in cycles per input sample.
  double cutoff_per_sample() const { return cutoff_hz / in_rate; }
  std::int64_t output_length(std::int64_t input_length) const;
};

// Unnormalized tap weight at distance `d` input samples from the output instant.
double sinc_tap(double d, double cutoff_per_sample);

namespace kernels {

// Polyphase table (up x kTaps), OpenMP over output samples.
std::vector<double> resample(std::span<const double> in, int in_rate, int out_rate);

// Hann-windowed STFT magnitude statistics over frames fully inside `sig`.
NoiseProfile noise_profile(std::span<const double> sig, const GateParams& params);

// Gate with overlap-add resynthesis; output length equals input length.
std::vector<double> spectral_gate(std::span<const double> sig, const NoiseProfile& profile,
                                  const GateParams& params);

// STFT -> ISTFT with a unit mask; used for reconstruction checks.
std::vector<double> stft_roundtrip(std::span<const double> sig, const GateParams& params);

// Micro totals of per-pair edit operations over a corpus.
EditOps corpus_edit_ops(std::span<const std::u32string> refs, std::span<const std::u32string> hyps);
EditOps corpus_edit_ops(std::span<const std::vector<std::string>> refs,
                        std::span<const std::vector<std::string>> hyps);

}  // namespace kernels

namespace reference {

// Direct per-output-sample evaluation, no table, single thread.
std::vector<double> resample(std::span<const double> in, int in_rate, int out_rate);

// Naive O(N^2) DFT, direct 2-D mask convolution, sample-by-sample overlap-add.
NoiseProfile noise_profile(std::span<const double> sig, const GateParams& params);
std::vector<double> spectral_gate(std::span<const double> sig, const NoiseProfile& profile,
                                  const GateParams& params);

EditOps corpus_edit_ops(std::span<const std::u32string> refs, std::span<const std::u32string> hyps);

}  // namespace reference

}  // namespace speechstd
