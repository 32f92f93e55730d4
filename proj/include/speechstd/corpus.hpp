#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "speechstd/io.hpp"

namespace speechstd {

struct SpeakerInfo {
  std::string age_band;
  std::string gender;
  std::string region;
  friend bool operator==(const SpeakerInfo&, const SpeakerInfo&) = default;
};

struct ChunkAnnotation {
  std::string dialect_text;
  std::string standard_text;
  friend bool operator==(const ChunkAnnotation&, const ChunkAnnotation&) = default;
};

// One corpus row: dialect audio, its dialect transcript and the standard
// text translation.
struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  std::string dialect_text;
  std::string standard_text;
  std::optional<SpeakerInfo> speaker;
  std::optional<std::vector<ChunkAnnotation>> explicit_chunks;
  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

enum class SplitName { Train, Val, Test };
std::string_view to_string(SplitName s);
SplitName parse_split_name(std::string_view s);

struct CorpusManifest {
  std::vector<UtteranceRecord> records;
  std::map<std::string, SplitName> split;
  // Directory that relative audio paths resolve against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve_audio(const UtteranceRecord& r) const;
  const UtteranceRecord* find(std::string_view id) const;
};

// Throws SchemaViolation (with line numbers) or IoFailure.
CorpusManifest load_manifest(const std::filesystem::path& path);
CorpusManifest parse_manifest(std::string_view jsonl, const std::filesystem::path& base_dir = {});
void save_manifest(const CorpusManifest& m, const std::filesystem::path& path);
std::string serialize_manifest(const CorpusManifest& m);

nlohmann::ordered_json record_to_json(const UtteranceRecord& r);
UtteranceRecord record_from_json(const nlohmann::json& j);  // throws SchemaViolation

// Sidecar: one {"id", "split"} object per line.
void load_split_sidecar(CorpusManifest& m, const std::filesystem::path& path);
void save_split_sidecar(const CorpusManifest& m, const std::filesystem::path& path);

struct MissingAudioEntry {
  std::string id;
  std::string path;
  std::string reason;
};

struct CorpusStats {
  std::int64_t unique_characters = 0;
  std::int64_t unique_words = 0;
  double total_duration_s = 0.0;
  std::int64_t record_count = 0;
  std::int64_t chunk_count = 0;
  std::vector<MissingAudioEntry> missing_audio;
};

// Text statistics only; no audio access.
CorpusStats compute_text_stats(const CorpusManifest& m);
CorpusStats compute_stats(const CorpusManifest& m, double window_s = 5.0);
nlohmann::json to_json(const CorpusStats& s);

struct SplitCounts {
  std::int64_t train = 0;
  std::int64_t val = 0;
  std::int64_t test = 0;
  std::int64_t sum() const { return train + val + test; }
};

// Seeded Fisher-Yates over record ids, then contiguous assignment.
// `by_recording` keeps every chunk of one recording ("rec:k" ids share
// "rec") in the same split; sizes are then filled group by group and may
// overshoot the requested counts. Throws InsufficientRecords.
CorpusManifest assign_splits(const CorpusManifest& m, const SplitCounts& counts, std::uint64_t seed,
                             bool by_recording = false);

// Recording id of a chunk id "rec:k"; the id itself when there is no ':'.
std::string parent_of(std::string_view chunk_id);

}  // namespace speechstd
