#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "speechstd/audio.hpp"
#include "speechstd/corpus.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("speechstd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::vector<double> sine(double freq, double amp, std::size_t n, int rate, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  }
  return x;
}

inline std::vector<double> gaussian_noise(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// 16 kHz recording of `seconds` with a distinct noisy tone per second, so
// that every 5 s chunk hashes differently.
inline speechstd::AudioSignal synthetic_recording(double seconds, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(seconds * speechstd::kCorpusSampleRate);
  auto x = gaussian_noise(n, 0.02, seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 300.0 + 40.0 * static_cast<double>((seed * 7 + i / 16000) % 20);
    x[i] += 0.3 * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / speechstd::kCorpusSampleRate);
  }
  return speechstd::AudioSignal(std::move(x), speechstd::kCorpusSampleRate);
}

// Writes synthetic_recording(seconds, seed) to dir/<id>.wav and returns a
// manifest record pointing at it.
inline speechstd::UtteranceRecord write_recording(const fs::path& dir, const std::string& id, double seconds,
                                                  std::uint64_t seed, std::string dialect, std::string standard) {
  speechstd::write_wav(synthetic_recording(seconds, seed), dir / (id + ".wav"));
  speechstd::UtteranceRecord r;
  r.id = id;
  r.audio_path = id + ".wav";
  r.dialect_text = std::move(dialect);
  r.standard_text = std::move(standard);
  return r;
}

inline std::string words(int count, const std::string& stem) {
  std::string s;
  for (int i = 0; i < count; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

}  // namespace testutil
