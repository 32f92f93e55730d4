#include "speechstd/corpus.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "speechstd/audio.hpp"
#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"
#include "speechstd/segmenter.hpp"
#include "speechstd/text.hpp"

namespace speechstd {

std::string_view to_string(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Val: return "val";
    case SplitName::Test: return "test";
  }
  return "train";
}

SplitName parse_split_name(std::string_view s) {
  if (s == "train") return SplitName::Train;
  if (s == "val") return SplitName::Val;
  if (s == "test") return SplitName::Test;
  throw Error(ErrorKind::SchemaViolation, "unknown split name '" + std::string(s) + "'");
}

std::filesystem::path CorpusManifest::resolve_audio(const UtteranceRecord& r) const {
  std::filesystem::path p(r.audio_path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

const UtteranceRecord* CorpusManifest::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string parent_of(std::string_view chunk_id) {
  const auto colon = chunk_id.rfind(':');
  return std::string(colon == std::string_view::npos ? chunk_id : chunk_id.substr(0, colon));
}

namespace {

std::string required_string(const nlohmann::json& j, const char* key, bool non_empty) {
  if (!j.contains(key)) throw Error(ErrorKind::SchemaViolation, std::string("missing field '") + key + "'");
  if (!j[key].is_string()) throw Error(ErrorKind::SchemaViolation, std::string("field '") + key + "' must be a string");
  std::string v = j[key].get<std::string>();
  if (non_empty && v.empty()) throw Error(ErrorKind::SchemaViolation, std::string("field '") + key + "' is empty");
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Unbiased draw in [0, bound] from the raw engine output; the standard
// distributions are implementation-defined and would break cross-platform
// reproducibility.
std::uint64_t draw_upto(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit = range == 0 ? 0 : (UINT64_MAX - range + 1) % range;
  while (true) {
    const std::uint64_t x = rng();
    if (x >= limit) return range == 0 ? x : x % range;
  }
}

template <class T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(draw_upto(rng, i - 1));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace

UtteranceRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaViolation, "record must be a JSON object");
  UtteranceRecord r;
  r.id = required_string(j, "id", true);
  r.audio_path = required_string(j, "audio", false);
  // Chunk rows ("rec:k") may carry empty text when the recording had
  // fewer tokens than chunks.
  const bool chunk_row = parent_of(r.id) != r.id;
  r.dialect_text = required_string(j, "dialect_text", !chunk_row);
  r.standard_text = required_string(j, "standard_text", !chunk_row);
  if (j.contains("speaker") && !j["speaker"].is_null()) {
    const auto& s = j["speaker"];
    if (!s.is_object()) throw Error(ErrorKind::SchemaViolation, "'speaker' must be an object");
    SpeakerInfo info;
    info.age_band = s.value("age_band", "");
    info.gender = s.value("gender", "");
    info.region = s.value("region", "");
    r.speaker = info;
  }
  if (j.contains("chunks") && !j["chunks"].is_null()) {
    const auto& c = j["chunks"];
    if (!c.is_array() || c.empty()) throw Error(ErrorKind::SchemaViolation, "'chunks' must be a non-empty array");
    std::vector<ChunkAnnotation> chunks;
    for (const auto& item : c) {
      if (!item.is_object()) throw Error(ErrorKind::SchemaViolation, "chunk entries must be objects");
      chunks.push_back(ChunkAnnotation{required_string(item, "d", false), required_string(item, "s", false)});
    }
    r.explicit_chunks = std::move(chunks);
  }
  return r;
}

nlohmann::ordered_json record_to_json(const UtteranceRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["audio"] = r.audio_path;
  j["dialect_text"] = r.dialect_text;
  j["standard_text"] = r.standard_text;
  if (r.speaker) {
    j["speaker"] = {{"age_band", r.speaker->age_band}, {"gender", r.speaker->gender}, {"region", r.speaker->region}};
  }
  if (r.explicit_chunks) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : *r.explicit_chunks) arr.push_back({{"d", c.dialect_text}, {"s", c.standard_text}});
    j["chunks"] = std::move(arr);
  }
  return j;
}

CorpusManifest parse_manifest(std::string_view jsonl, const std::filesystem::path& base_dir) {
  CorpusManifest m;
  m.base_dir = base_dir;
  std::unordered_map<std::string, std::size_t> first_line;
  const auto lines = lines_of(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::size_t line_no = i + 1;
    UtteranceRecord r;
    try {
      r = record_from_json(nlohmann::json::parse(lines[i]));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line_no) + ": " + e.what());
    }
    auto [it, inserted] = first_line.emplace(r.id, line_no);
    if (!inserted) {
      throw Error(ErrorKind::SchemaViolation, "duplicate id '" + r.id + "' on lines " + std::to_string(it->second) +
                                                  " and " + std::to_string(line_no));
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

std::string serialize_manifest(const CorpusManifest& m) {
  std::string out;
  for (const auto& r : m.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const CorpusManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_manifest(m));
}

void load_split_sidecar(CorpusManifest& m, const std::filesystem::path& path) {
  std::set<std::string> ids;
  for (const auto& r : m.records) ids.insert(r.id);
  m.split.clear();
  const std::string content = read_file(path);
  const auto lines = lines_of(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      const std::string id = required_string(j, "id", true);
      if (!ids.count(id)) throw Error(ErrorKind::SchemaViolation, "unknown id '" + id + "'");
      if (!m.split.emplace(id, parse_split_name(required_string(j, "split", true))).second) {
        throw Error(ErrorKind::SchemaViolation, "id '" + id + "' assigned twice");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::SchemaViolation, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaViolation, where + ": " + e.what());
    }
  }
}

void save_split_sidecar(const CorpusManifest& m, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : m.records) {
    auto it = m.split.find(r.id);
    if (it == m.split.end()) continue;
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["split"] = std::string(to_string(it->second));
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

CorpusStats compute_text_stats(const CorpusManifest& m) {
  std::set<char32_t> chars;
  std::set<std::string> words;
  for (const auto& r : m.records) {
    for (char32_t c : text::to_u32(text::nfc(r.dialect_text))) {
      if (!text::is_whitespace(c)) chars.insert(c);
    }
    for (auto& w : text::tokenize(r.dialect_text)) words.insert(std::move(w));
  }
  CorpusStats s;
  s.unique_characters = static_cast<std::int64_t>(chars.size());
  s.unique_words = static_cast<std::int64_t>(words.size());
  s.record_count = static_cast<std::int64_t>(m.records.size());
  return s;
}

CorpusStats compute_stats(const CorpusManifest& m, double window_s) {
  CorpusStats s = compute_text_stats(m);
  const std::int64_t window_len = window_samples(window_s);
  const auto n = static_cast<std::int64_t>(m.records.size());
  std::vector<double> durations(m.records.size(), 0.0);
  std::vector<std::int64_t> chunks(m.records.size(), 0);
  std::vector<std::string> errors(m.records.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& r = m.records[static_cast<std::size_t>(i)];
    try {
      const WavInfo info = read_wav_info(m.resolve_audio(r));
      durations[i] = info.duration_seconds();
      const std::int64_t standardized_len =
          info.sample_rate == kCorpusSampleRate
              ? info.frames
              : ResamplerDesign::make(info.sample_rate, kCorpusSampleRate).output_length(info.frames);
      chunks[i] = segment_count(standardized_len, window_len);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  for (std::size_t i = 0; i < m.records.size(); ++i) {
    if (!errors[i].empty()) {
      s.missing_audio.push_back({m.records[i].id, m.resolve_audio(m.records[i]).string(), errors[i]});
      continue;
    }
    s.total_duration_s += durations[i];
    s.chunk_count += chunks[i];
  }
  return s;
}

nlohmann::json to_json(const CorpusStats& s) {
  nlohmann::json j;
  j["unique_characters"] = s.unique_characters;
  j["unique_words"] = s.unique_words;
  j["total_duration_s"] = s.total_duration_s;
  j["total_duration_h"] = s.total_duration_s / 3600.0;
  j["record_count"] = s.record_count;
  j["chunk_count"] = s.chunk_count;
  nlohmann::json missing = nlohmann::json::array();
  for (const auto& e : s.missing_audio) missing.push_back({{"id", e.id}, {"path", e.path}, {"reason", e.reason}});
  j["missing_audio"] = std::move(missing);
  return j;
}

CorpusManifest assign_splits(const CorpusManifest& m, const SplitCounts& counts, std::uint64_t seed,
                             bool by_recording) {
  if (counts.train < 0 || counts.val < 0 || counts.test < 0) {
    throw Error(ErrorKind::InvalidParams, "split counts must be non-negative");
  }
  const auto available = static_cast<std::int64_t>(m.records.size());
  if (counts.sum() > available) {
    throw Error(ErrorKind::InsufficientRecords, "requested " + std::to_string(counts.sum()) + " records but the manifest has " +
                                                    std::to_string(available));
  }

  // Shuffle over sorted ids so the result does not depend on line order.
  std::vector<std::vector<std::string>> units;
  if (by_recording) {
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& r : m.records) groups[parent_of(r.id)].push_back(r.id);
    for (auto& [parent, ids] : groups) {
      std::sort(ids.begin(), ids.end());
      units.push_back(std::move(ids));
    }
  } else {
    std::vector<std::string> ids;
    for (const auto& r : m.records) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    for (auto& id : ids) units.push_back({std::move(id)});
  }
  seeded_shuffle(units, seed);

  CorpusManifest out = m;
  out.split.clear();
  const std::pair<SplitName, std::int64_t> plan[] = {
      {SplitName::Train, counts.train}, {SplitName::Val, counts.val}, {SplitName::Test, counts.test}};
  std::size_t next = 0;
  for (const auto& [name, target] : plan) {
    std::int64_t assigned = 0;
    while (assigned < target && next < units.size()) {
      for (const auto& id : units[next]) out.split.emplace(id, name);
      assigned += static_cast<std::int64_t>(units[next].size());
      ++next;
    }
  }
  return out;
}

}  // namespace speechstd
