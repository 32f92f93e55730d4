#pragma once

#include <cstdint>

#include "speechstd/denoise.hpp"

namespace speechstd::detail {

// Frame grid for gating. The signal is zero-padded by fft_size on the left
// and enough on the right that every real sample is covered by a full set
// of overlapping frames, so the squared-window sum is constant over it.
struct Framing {
  std::int64_t fft_size = 0;
  std::int64_t hop = 0;
  std::int64_t pad_left = 0;
  std::int64_t frames = 0;
  std::int64_t length = 0;  // unpadded signal length

  static Framing make(std::int64_t length, const GateParams& params) {
    Framing f;
    f.fft_size = static_cast<std::int64_t>(params.fft_size);
    f.hop = static_cast<std::int64_t>(params.hop);
    f.pad_left = f.fft_size;
    f.length = length;
    f.frames = length == 0 ? 0 : (f.pad_left + length - 1) / f.hop + 1;
    return f;
  }

  // Sample of the padded signal at padded index q.
  double padded(const double* x, std::int64_t q) const {
    const std::int64_t i = q - pad_left;
    return (i >= 0 && i < length) ? x[i] : 0.0;
  }

  // Frames whose support contains padded index q: [first, last].
  std::int64_t first_frame(std::int64_t q) const {
    const std::int64_t lo = q - fft_size + 1;
    return lo <= 0 ? 0 : (lo + hop - 1) / hop;
  }
  std::int64_t last_frame(std::int64_t q) const {
    const std::int64_t m = q / hop;
    return m < frames - 1 ? m : frames - 1;
  }
};

// Frames fully inside an unpadded signal, used for noise statistics.
inline std::int64_t inner_frame_count(std::int64_t length, const GateParams& params) {
  const auto n = static_cast<std::int64_t>(params.fft_size);
  return length < n ? 0 : (length - n) / static_cast<std::int64_t>(params.hop) + 1;
}

}  // namespace speechstd::detail
