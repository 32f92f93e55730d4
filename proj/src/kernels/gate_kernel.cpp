#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"
#include "stft_framing.hpp"

namespace speechstd::kernels {

namespace {

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, flags);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), out, in, flags | FFTW_DESTROY_INPUT);
    fftw_free(in);
    fftw_free(out);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(forward_, in, reinterpret_cast<fftw_complex*>(out));
  }
  // Unnormalized; scales by n. Overwrites `in`.
  void inverse(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  std::size_t n_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

using Spectra = std::vector<std::complex<double>>;

Spectra analyze(std::span<const double> sig, const detail::Framing& fr, const std::vector<double>& window,
                const RealFft& fft) {
  const std::int64_t n = fr.fft_size;
  const std::int64_t bins = n / 2 + 1;
  Spectra spectra(static_cast<std::size_t>(fr.frames * bins));
#pragma omp parallel
  {
    std::vector<double> buf(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
    for (std::int64_t m = 0; m < fr.frames; ++m) {
      const std::int64_t start = m * fr.hop;
      for (std::int64_t i = 0; i < n; ++i) buf[i] = window[i] * fr.padded(sig.data(), start + i);
      fft.forward(buf.data(), spectra.data() + m * bins);
    }
  }
  return spectra;
}

std::vector<double> synthesize(Spectra& spectra, const detail::Framing& fr, const std::vector<double>& window,
                               const RealFft& fft) {
  const std::int64_t n = fr.fft_size;
  const std::int64_t bins = n / 2 + 1;
  std::vector<double> frames(static_cast<std::size_t>(fr.frames * n));
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    double* out = frames.data() + m * n;
    fft.inverse(spectra.data() + m * bins, out);
    for (std::int64_t i = 0; i < n; ++i) out[i] *= window[i] / static_cast<double>(n);
  }

  std::vector<double> y(static_cast<std::size_t>(fr.length));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < fr.length; ++i) {
    const std::int64_t q = i + fr.pad_left;
    double acc = 0.0;
    double norm = 0.0;
    for (std::int64_t m = fr.first_frame(q); m <= fr.last_frame(q); ++m) {
      const std::int64_t off = q - m * fr.hop;
      acc += frames[m * n + off];
      norm += window[off] * window[off];
    }
    y[i] = norm > 1e-12 ? acc / norm : 0.0;
  }
  return y;
}

}  // namespace

NoiseProfile noise_profile(std::span<const double> sig, const GateParams& params) {
  params.validate();
  const std::int64_t frames = detail::inner_frame_count(static_cast<std::int64_t>(sig.size()), params);
  if (frames == 0) {
    throw Error(ErrorKind::TooShort, "need at least " + std::to_string(params.fft_size) + " samples, got " +
                                         std::to_string(sig.size()));
  }
  const std::int64_t n = static_cast<std::int64_t>(params.fft_size);
  const std::int64_t bins = n / 2 + 1;
  const std::int64_t hop = static_cast<std::int64_t>(params.hop);
  const std::vector<double> window = hann_window(params.fft_size);
  const RealFft fft(params.fft_size);

  std::vector<double> mags(static_cast<std::size_t>(frames * bins));
#pragma omp parallel
  {
    std::vector<double> buf(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(bins));
#pragma omp for schedule(static)
    for (std::int64_t m = 0; m < frames; ++m) {
      for (std::int64_t i = 0; i < n; ++i) buf[i] = window[i] * sig[m * hop + i];
      fft.forward(buf.data(), spec.data());
      for (std::int64_t b = 0; b < bins; ++b) mags[m * bins + b] = std::abs(spec[b]);
    }
  }

  NoiseProfile profile;
  profile.fft_size = params.fft_size;
  profile.frames = static_cast<std::size_t>(frames);
  profile.mean_mag.assign(static_cast<std::size_t>(bins), 0.0);
  profile.std_mag.assign(static_cast<std::size_t>(bins), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < bins; ++b) {
    double sum = 0.0;
    for (std::int64_t m = 0; m < frames; ++m) sum += mags[m * bins + b];
    const double mean = sum / frames;
    double var = 0.0;
    for (std::int64_t m = 0; m < frames; ++m) {
      const double d = mags[m * bins + b] - mean;
      var += d * d;
    }
    profile.mean_mag[b] = mean;
    profile.std_mag[b] = std::sqrt(var / frames);
  }
  return profile;
}

std::vector<double> spectral_gate(std::span<const double> sig, const NoiseProfile& profile,
                                  const GateParams& params) {
  params.validate();
  if (profile.fft_size != params.fft_size || profile.mean_mag.size() != params.bins() ||
      profile.std_mag.size() != params.bins()) {
    throw Error(ErrorKind::ProfileMismatch, "profile fft_size " + std::to_string(profile.fft_size) +
                                                " does not match gate fft_size " + std::to_string(params.fft_size));
  }
  const auto fr = detail::Framing::make(static_cast<std::int64_t>(sig.size()), params);
  if (fr.frames == 0) return {};
  const std::int64_t bins = static_cast<std::int64_t>(params.bins());
  const std::vector<double> window = hann_window(params.fft_size);
  const RealFft fft(params.fft_size);
  Spectra spectra = analyze(sig, fr, window, fft);

  std::vector<double> threshold(static_cast<std::size_t>(bins));
  for (std::int64_t b = 0; b < bins; ++b) {
    threshold[b] = profile.mean_mag[b] + params.n_std_thresh * profile.std_mag[b];
  }

  // Binary pass mask, then separable triangular smoothing: frequency first,
  // time second, zero outside the grid.
  const std::vector<double> ftaps = triangular_taps(params.smoothing_bins);
  const std::vector<double> ttaps = triangular_taps(params.smoothing_frames);
  const std::int64_t fhalf = static_cast<std::int64_t>(params.smoothing_bins);
  const std::int64_t thalf = static_cast<std::int64_t>(params.smoothing_frames);
  const std::size_t cells = static_cast<std::size_t>(fr.frames * bins);
  std::vector<double> mask(cells);
  std::vector<double> by_freq(cells);
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    for (std::int64_t b = 0; b < bins; ++b) {
      mask[m * bins + b] = std::abs(spectra[m * bins + b]) > threshold[b] ? 1.0 : 0.0;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    for (std::int64_t b = 0; b < bins; ++b) {
      double acc = 0.0;
      for (std::int64_t d = -fhalf; d <= fhalf; ++d) {
        const std::int64_t bb = b + d;
        if (bb >= 0 && bb < bins) acc += ftaps[d + fhalf] * mask[m * bins + bb];
      }
      by_freq[m * bins + b] = acc;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    for (std::int64_t b = 0; b < bins; ++b) {
      double acc = 0.0;
      for (std::int64_t d = -thalf; d <= thalf; ++d) {
        const std::int64_t mm = m + d;
        if (mm >= 0 && mm < fr.frames) acc += ttaps[d + thalf] * by_freq[mm * bins + b];
      }
      const double gain = 1.0 - params.prop_decrease * (1.0 - acc);
      spectra[m * bins + b] *= gain;
    }
  }
  return synthesize(spectra, fr, window, fft);
}

std::vector<double> stft_roundtrip(std::span<const double> sig, const GateParams& params) {
  params.validate();
  const auto fr = detail::Framing::make(static_cast<std::int64_t>(sig.size()), params);
  if (fr.frames == 0) return {};
  const std::vector<double> window = hann_window(params.fft_size);
  const RealFft fft(params.fft_size);
  Spectra spectra = analyze(sig, fr, window, fft);
  return synthesize(spectra, fr, window, fft);
}

}  // namespace speechstd::kernels
