#include <cmath>
#include <complex>
#include <numbers>

#include "../kernels/stft_framing.hpp"
#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"

namespace speechstd::reference {

namespace {

struct NaiveDft {
  explicit NaiveDft(std::size_t n) : n(n), cos_table(n), sin_table(n) {
    for (std::size_t i = 0; i < n; ++i) {
      cos_table[i] = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
      sin_table[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    }
  }

  std::vector<std::complex<double>> forward(const std::vector<double>& x) const {
    std::vector<std::complex<double>> X(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t idx = (k * t) % n;
        re += x[t] * cos_table[idx];
        im -= x[t] * sin_table[idx];
      }
      X[k] = {re, im};
    }
    return X;
  }

  std::vector<double> inverse(const std::vector<std::complex<double>>& X) const {
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
      double acc = X[0].real() + ((t % 2) ? -X[n / 2].real() : X[n / 2].real());
      for (std::size_t k = 1; k < n / 2; ++k) {
        const std::size_t idx = (k * t) % n;
        acc += 2.0 * (X[k].real() * cos_table[idx] - X[k].imag() * sin_table[idx]);
      }
      x[t] = acc / static_cast<double>(n);
    }
    return x;
  }

  std::size_t n;
  std::vector<double> cos_table;
  std::vector<double> sin_table;
};

}  // namespace

NoiseProfile noise_profile(std::span<const double> sig, const GateParams& params) {
  params.validate();
  const std::int64_t frames = detail::inner_frame_count(static_cast<std::int64_t>(sig.size()), params);
  if (frames == 0) throw Error(ErrorKind::TooShort, "signal shorter than one frame");
  const std::size_t n = params.fft_size;
  const std::vector<double> window = hann_window(n);
  const NaiveDft dft(n);

  std::vector<std::vector<double>> mags;
  for (std::int64_t m = 0; m < frames; ++m) {
    std::vector<double> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = window[i] * sig[m * params.hop + i];
    const auto X = dft.forward(buf);
    std::vector<double> mag(X.size());
    for (std::size_t b = 0; b < X.size(); ++b) mag[b] = std::abs(X[b]);
    mags.push_back(std::move(mag));
  }

  NoiseProfile p;
  p.fft_size = n;
  p.frames = static_cast<std::size_t>(frames);
  p.mean_mag.assign(params.bins(), 0.0);
  p.std_mag.assign(params.bins(), 0.0);
  for (std::size_t b = 0; b < params.bins(); ++b) {
    double sum = 0.0;
    for (const auto& mag : mags) sum += mag[b];
    const double mean = sum / frames;
    double var = 0.0;
    for (const auto& mag : mags) var += (mag[b] - mean) * (mag[b] - mean);
    p.mean_mag[b] = mean;
    p.std_mag[b] = std::sqrt(var / frames);
  }
  return p;
}

std::vector<double> spectral_gate(std::span<const double> sig, const NoiseProfile& profile,
                                  const GateParams& params) {
  params.validate();
  if (profile.fft_size != params.fft_size) throw Error(ErrorKind::ProfileMismatch, "fft_size differs");
  const auto fr = detail::Framing::make(static_cast<std::int64_t>(sig.size()), params);
  const std::size_t n = params.fft_size;
  const std::size_t bins = params.bins();
  const std::vector<double> window = hann_window(n);
  const NaiveDft dft(n);

  std::vector<std::vector<std::complex<double>>> spectra;
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    std::vector<double> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = window[i] * fr.padded(sig.data(), m * fr.hop + i);
    spectra.push_back(dft.forward(buf));
  }

  std::vector<std::vector<double>> mask(fr.frames, std::vector<double>(bins));
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double thresh = profile.mean_mag[b] + params.n_std_thresh * profile.std_mag[b];
      mask[m][b] = std::abs(spectra[m][b]) > thresh ? 1.0 : 0.0;
    }
  }

  // Direct 2-D convolution with the outer-product filter.
  const std::vector<double> ftaps = triangular_taps(params.smoothing_bins);
  const std::vector<double> ttaps = triangular_taps(params.smoothing_frames);
  const auto fh = static_cast<std::int64_t>(params.smoothing_bins);
  const auto th = static_cast<std::int64_t>(params.smoothing_frames);
  std::vector<std::vector<double>> time_frames;
  for (std::int64_t m = 0; m < fr.frames; ++m) {
    auto spec = spectra[m];
    for (std::size_t b = 0; b < bins; ++b) {
      double smooth = 0.0;
      for (std::int64_t dt = -th; dt <= th; ++dt) {
        for (std::int64_t df = -fh; df <= fh; ++df) {
          const std::int64_t mm = m + dt;
          const std::int64_t bb = static_cast<std::int64_t>(b) + df;
          if (mm < 0 || mm >= fr.frames || bb < 0 || bb >= static_cast<std::int64_t>(bins)) continue;
          smooth += ttaps[dt + th] * ftaps[df + fh] * mask[mm][bb];
        }
      }
      spec[b] *= 1.0 - params.prop_decrease * (1.0 - smooth);
    }
    auto frame = dft.inverse(spec);
    for (std::size_t i = 0; i < n; ++i) frame[i] *= window[i];
    time_frames.push_back(std::move(frame));
  }

  std::vector<double> y(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const std::int64_t q = static_cast<std::int64_t>(i) + fr.pad_left;
    double acc = 0.0, norm = 0.0;
    for (std::int64_t m = 0; m < fr.frames; ++m) {
      const std::int64_t off = q - m * fr.hop;
      if (off < 0 || off >= static_cast<std::int64_t>(n)) continue;
      acc += time_frames[m][off];
      norm += window[off] * window[off];
    }
    y[i] = norm > 1e-12 ? acc / norm : 0.0;
  }
  return y;
}

}  // namespace speechstd::reference
