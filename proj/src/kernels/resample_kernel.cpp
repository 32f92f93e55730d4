#include <cmath>
#include <numbers>
#include <numeric>

#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"

namespace speechstd {

ResamplerDesign ResamplerDesign::make(int in_rate, int out_rate) {
  if (in_rate <= 0 || out_rate <= 0) throw Error(ErrorKind::InvalidParams, "sample rates must be positive");
  ResamplerDesign d;
  d.in_rate = in_rate;
  d.out_rate = out_rate;
  const std::int64_t g = std::gcd(in_rate, out_rate);
  d.up = out_rate / g;
  d.down = in_rate / g;
  d.cutoff_hz = 0.45 * std::min(in_rate, out_rate);
  return d;
}

std::int64_t ResamplerDesign::output_length(std::int64_t input_length) const {
  return (input_length * out_rate + in_rate / 2) / in_rate;
}

double sinc_tap(double d, double cutoff_per_sample) {
  constexpr double half = ResamplerDesign::kTaps / 2.0;
  if (std::abs(d) >= half) return 0.0;
  const double x = 2.0 * cutoff_per_sample * d;
  const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  const double r = d / half;
  const double beta = ResamplerDesign::kKaiserBeta;
  const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, beta);
  return 2.0 * cutoff_per_sample * sinc * kaiser;
}

namespace kernels {

// Output sample n sits at input position n*down/up. With base = floor of
// that position and phase = (n*down) mod up, tap k reads input
// base - (kTaps/2 - 1) + k at distance phase/up + (kTaps/2 - 1) - k.
std::vector<double> resample(std::span<const double> in, int in_rate, int out_rate) {
  const ResamplerDesign design = ResamplerDesign::make(in_rate, out_rate);
  constexpr int taps = ResamplerDesign::kTaps;
  constexpr int lead = taps / 2 - 1;
  const std::int64_t up = design.up;
  const std::int64_t down = design.down;
  const double fc = design.cutoff_per_sample();

  std::vector<double> table(static_cast<std::size_t>(up) * taps);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < up; ++p) {
    double* row = table.data() + p * taps;
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
      row[k] = sinc_tap(static_cast<double>(p) / up + lead - k, fc);
      sum += row[k];
    }
    for (int k = 0; k < taps; ++k) row[k] /= sum;
  }

  const std::int64_t n_in = static_cast<std::int64_t>(in.size());
  const std::int64_t n_out = design.output_length(n_in);
  std::vector<double> out(static_cast<std::size_t>(n_out));
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t base = pos / up;
    const double* row = table.data() + (pos % up) * taps;
    const std::int64_t first = base - lead;
    double acc = 0.0;
    if (first >= 0 && first + taps <= n_in) {
      const double* x = in.data() + first;
      for (int k = 0; k < taps; ++k) acc += row[k] * x[k];
    } else {
      for (int k = 0; k < taps; ++k) {
        const std::int64_t j = first + k;
        if (j >= 0 && j < n_in) acc += row[k] * in[static_cast<std::size_t>(j)];
      }
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

}  // namespace kernels

}  // namespace speechstd
