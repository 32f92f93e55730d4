#include "speechstd/segmenter.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "speechstd/error.hpp"
#include "speechstd/text.hpp"

namespace speechstd {

std::string chunk_id(std::string_view parent_id, std::int64_t index_k) {
  return std::string(parent_id) + ":" + std::to_string(index_k);
}

std::string AlignedChunk::id() const { return chunk_id(segment.parent_id, segment.index_k); }

std::int64_t window_samples(double window_s, int sample_rate) {
  const double exact = window_s * sample_rate;
  const double rounded = std::round(exact);
  if (!(window_s > 0.0) || rounded < 1.0 || std::abs(exact - rounded) > 1e-6) {
    throw Error(ErrorKind::InvalidParams,
                "window of " + std::to_string(window_s) + " s is not a whole number of samples");
  }
  return static_cast<std::int64_t>(rounded);
}

std::int64_t segment_count(std::int64_t total_samples, std::int64_t window_len) {
  if (window_len <= 0) throw Error(ErrorKind::InvalidParams, "window must be positive");
  return total_samples <= 0 ? 0 : total_samples / window_len;
}

std::int64_t segment_count_seconds(double duration_s, double window_s, int sample_rate) {
  if (duration_s < 0) throw Error(ErrorKind::InvalidParams, "negative duration");
  const auto total = static_cast<std::int64_t>(std::llround(duration_s * sample_rate));
  return segment_count(total, window_samples(window_s, sample_rate));
}

std::vector<Segment> split_audio(const AudioSignal& sig, double window_s, std::vector<SegmentWarning>* warnings) {
  if (sig.sample_rate() != kCorpusSampleRate) {
    throw Error(ErrorKind::NotStandardized, sig.source_id() + ": split_audio expects 16 kHz input");
  }
  const std::int64_t w = window_samples(window_s, sig.sample_rate());
  const std::int64_t n = segment_count(sig.size(), w);
  std::vector<Segment> out;
  if (n == 0) {
    SegmentWarning warning{sig.source_id(), sig.duration_seconds(),
                           "shorter than one " + std::to_string(window_s) + " s window; excluded"};
    spdlog::warn("{}: {:.3f} s {}", warning.parent_id, warning.duration_s, warning.message);
    if (warnings) warnings->push_back(std::move(warning));
    return out;
  }
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) {
    out.push_back(Segment{sig.source_id(), k, sig.slice((k - 1) * w, w)});
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> split_boundaries(std::size_t token_count, std::size_t n_chunks) {
  if (n_chunks == 0) throw Error(ErrorKind::ZeroChunks, "cannot split into zero chunks");
  std::vector<std::pair<std::size_t, std::size_t>> bounds;
  bounds.reserve(n_chunks);
  for (std::size_t k = 1; k <= n_chunks; ++k) {
    bounds.emplace_back((k - 1) * token_count / n_chunks, k * token_count / n_chunks);
  }
  return bounds;
}

std::vector<std::vector<std::string>> split_text(const std::vector<std::string>& tokens, std::size_t n_chunks) {
  std::vector<std::vector<std::string>> chunks;
  for (const auto& [begin, end] : split_boundaries(tokens.size(), n_chunks)) {
    chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return chunks;
}

std::vector<TextChunk> align_text(const UtteranceRecord& record, std::int64_t n_segments) {
  std::vector<TextChunk> chunks;
  if (n_segments <= 0) return chunks;
  const auto n = static_cast<std::size_t>(n_segments);
  if (record.explicit_chunks) {
    const auto& ann = *record.explicit_chunks;
    if (ann.size() != n) {
      throw Error(ErrorKind::AnnotationMismatch, record.id + ": " + std::to_string(ann.size()) +
                                                     " annotated chunks but " + std::to_string(n) + " audio segments");
    }
    for (std::size_t k = 0; k < n; ++k) {
      chunks.push_back(TextChunk{record.id, static_cast<std::int64_t>(k + 1), text::tokenize(ann[k].dialect_text),
                                 text::tokenize(ann[k].standard_text)});
    }
    return chunks;
  }
  auto dialect = split_text(text::tokenize(record.dialect_text), n);
  auto standard = split_text(text::tokenize(record.standard_text), n);
  for (std::size_t k = 0; k < n; ++k) {
    chunks.push_back(
        TextChunk{record.id, static_cast<std::int64_t>(k + 1), std::move(dialect[k]), std::move(standard[k])});
  }
  return chunks;
}

std::vector<AlignedChunk> align(const UtteranceRecord& record, const AudioSignal& standardized, double window_s,
                                std::vector<SegmentWarning>* warnings) {
  std::vector<Segment> segments = split_audio(standardized.with_source_id(record.id), window_s, warnings);
  std::vector<TextChunk> texts = align_text(record, static_cast<std::int64_t>(segments.size()));
  std::vector<AlignedChunk> out;
  out.reserve(segments.size());
  for (std::size_t k = 0; k < segments.size(); ++k) {
    out.push_back(AlignedChunk{std::move(segments[k]), std::move(texts[k])});
  }
  return out;
}

StreamingSegmenter::StreamingSegmenter(std::string parent_id, std::int64_t window_len, int sample_rate, Sink sink)
    : parent_id_(std::move(parent_id)), window_len_(window_len), sample_rate_(sample_rate), sink_(std::move(sink)) {
  if (window_len_ <= 0) throw Error(ErrorKind::InvalidParams, "window must be positive");
  pending_.reserve(static_cast<std::size_t>(window_len_));
}

void StreamingSegmenter::push(std::span<const double> block) {
  consumed_ += static_cast<std::int64_t>(block.size());
  while (!block.empty()) {
    const std::size_t room = static_cast<std::size_t>(window_len_) - pending_.size();
    const std::size_t take = std::min(room, block.size());
    pending_.insert(pending_.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(take));
    block = block.subspan(take);
    if (pending_.size() == static_cast<std::size_t>(window_len_)) {
      ++emitted_;
      std::vector<double> full;
      full.swap(pending_);
      pending_.reserve(static_cast<std::size_t>(window_len_));
      sink_(Segment{parent_id_, emitted_, AudioSignal(std::move(full), sample_rate_, parent_id_)});
    }
  }
}

std::int64_t StreamingSegmenter::finish() {
  if (!pending_.empty()) {
    spdlog::debug("{}: dropping {} trailing samples", parent_id_, pending_.size());
    pending_.clear();
  }
  return emitted_;
}

}  // namespace speechstd
