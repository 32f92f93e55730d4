#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "speechstd/audio.hpp"
#include "speechstd/corpus.hpp"

namespace speechstd {

inline constexpr double kDefaultWindowSeconds = 5.0;

struct Segment {
  std::string parent_id;
  std::int64_t index_k = 0;  // 1-based
  AudioSignal audio;
};

struct TextChunk {
  std::string parent_id;
  std::int64_t index_k = 0;
  std::vector<std::string> dialect_tokens;
  std::vector<std::string> standard_tokens;
};

struct AlignedChunk {
  Segment segment;
  TextChunk text;

  // "parent:k"
  std::string id() const;
};

std::string chunk_id(std::string_view parent_id, std::int64_t index_k);

// Window length in samples; must be a positive whole number of samples.
std::int64_t window_samples(double window_s, int sample_rate = kCorpusSampleRate);

std::int64_t segment_count(std::int64_t total_samples, std::int64_t window_len);
std::int64_t segment_count_seconds(double duration_s, double window_s = kDefaultWindowSeconds,
                                   int sample_rate = kCorpusSampleRate);

struct SegmentWarning {
  std::string parent_id;
  double duration_s = 0.0;
  std::string message;
};

// Fixed windows, remainder truncated. Segments share the input's storage.
std::vector<Segment> split_audio(const AudioSignal& sig, double window_s = kDefaultWindowSeconds,
                                 std::vector<SegmentWarning>* warnings = nullptr);

// Chunk k (1-based) spans [floor((k-1)W/n), floor(kW/n)).
std::vector<std::pair<std::size_t, std::size_t>> split_boundaries(std::size_t token_count,
                                                                  std::size_t n_chunks);
std::vector<std::vector<std::string>> split_text(const std::vector<std::string>& tokens,
                                                 std::size_t n_chunks);

// Pairs segment k with text chunk k. Explicit annotations in the record win
// over automatic splitting. Throws AnnotationMismatch.
std::vector<AlignedChunk> align(const UtteranceRecord& record, const AudioSignal& standardized,
                                double window_s = kDefaultWindowSeconds,
                                std::vector<SegmentWarning>* warnings = nullptr);

// Text-only alignment for a recording with a known segment count.
std::vector<TextChunk> align_text(const UtteranceRecord& record, std::int64_t n_segments);

// Incremental segmenter for inputs that do not fit in memory. Each full
// window is handed to the sink as soon as it is complete.
class StreamingSegmenter {
 public:
  using Sink = std::function<void(Segment&&)>;

  StreamingSegmenter(std::string parent_id, std::int64_t window_len, int sample_rate, Sink sink);

  void push(std::span<const double> block);
  // Returns the number of emitted segments; the partial tail is dropped.
  std::int64_t finish();

  std::int64_t emitted() const { return emitted_; }
  std::int64_t consumed() const { return consumed_; }

 private:
  std::string parent_id_;
  std::int64_t window_len_;
  int sample_rate_;
  Sink sink_;
  std::vector<double> pending_;
  std::int64_t emitted_ = 0;
  std::int64_t consumed_ = 0;
};

}  // namespace speechstd
