#include <cmath>

#include "speechstd/kernels.hpp"

namespace speechstd::reference {

std::vector<double> resample(std::span<const double> in, int in_rate, int out_rate) {
  const ResamplerDesign design = ResamplerDesign::make(in_rate, out_rate);
  const double fc = design.cutoff_per_sample();
  const std::int64_t n_in = static_cast<std::int64_t>(in.size());
  const std::int64_t n_out = design.output_length(n_in);
  constexpr int half = ResamplerDesign::kTaps / 2;

  std::vector<double> out(static_cast<std::size_t>(n_out));
  for (std::int64_t n = 0; n < n_out; ++n) {
    // Exact rational position split into integer and fractional parts.
    const std::int64_t num = n * in_rate;
    const std::int64_t base = num / out_rate;
    const double frac = static_cast<double>(num % out_rate) / out_rate;
    double weight_sum = 0.0;
    double acc = 0.0;
    for (std::int64_t j = base - (half - 1); j <= base + half; ++j) {
      const double w = sinc_tap(static_cast<double>(base - j) + frac, fc);
      weight_sum += w;
      if (j >= 0 && j < n_in) acc += w * in[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(n)] = acc / weight_sum;
  }
  return out;
}

}  // namespace speechstd::reference
