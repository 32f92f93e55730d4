#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace speechstd {

inline constexpr int kCorpusSampleRate = 16000;

// Mono PCM signal with amplitudes normalized to [-1, 1].
//
// Storage is immutable and shared, so copies and slices are cheap and a
// signal can be handed to any number of worker threads.
class AudioSignal {
 public:
  AudioSignal() = default;
  AudioSignal(std::vector<double> samples, int sample_rate, std::string source_id = {});

  std::span<const double> samples() const {
    return storage_ ? std::span<const double>(storage_->data() + offset_, length_)
                    : std::span<const double>();
  }
  std::int64_t size() const { return length_; }
  bool empty() const { return length_ == 0; }
  int sample_rate() const { return sample_rate_; }
  const std::string& source_id() const { return source_id_; }
  double duration_seconds() const {
    return static_cast<double>(length_) / static_cast<double>(sample_rate_);
  }

  // View of [offset, offset + length) sharing this signal's storage.
  AudioSignal slice(std::int64_t offset, std::int64_t length) const;
  AudioSignal with_source_id(std::string id) const;

  friend bool operator==(const AudioSignal& a, const AudioSignal& b);

 private:
  std::shared_ptr<const std::vector<double>> storage_;
  std::int64_t offset_ = 0;
  std::int64_t length_ = 0;
  int sample_rate_ = kCorpusSampleRate;
  std::string source_id_;
};

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::int64_t frames = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

// Header-only probe; does not decode samples.
WavInfo read_wav_info(const std::filesystem::path& path);

// Decodes 8/16/24/32-bit integer or 32-bit float PCM and downmixes to mono
// by the arithmetic mean of channels.
AudioSignal read_wav(const std::filesystem::path& path);
AudioSignal decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {});

// 16-bit PCM little-endian, 16 kHz mono only. Written atomically.
void write_wav(const AudioSignal& sig, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const AudioSignal& sig);

// Averages interleaved channels into one.
std::vector<double> downmix(std::span<const double> interleaved, int channels);

// Resample to 16 kHz (identity when already there); clips to [-1, 1].
AudioSignal standardize(const AudioSignal& sig);

std::int16_t quantize_pcm16(double x);
std::vector<std::uint8_t> to_pcm16le(std::span<const double> samples);
std::vector<double> from_pcm16le(std::span<const std::uint8_t> bytes);

}  // namespace speechstd
