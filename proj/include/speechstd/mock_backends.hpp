#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "speechstd/protocol.hpp"

namespace speechstd {

// Stand-in recognizer: FNV-1a 64 of the raw PCM bytes indexes a fixture
// table of dialect transcripts.
class MockAsr {
 public:
  MockAsr() = default;
  explicit MockAsr(std::unordered_map<std::uint64_t, std::string> table) : table_(std::move(table)) {}

  // JSONL rows {"fnv1a64": "<16 hex digits>", "text": "..."}.
  static MockAsr from_file(const std::filesystem::path& path);

  void add(std::uint64_t hash, std::string text) { table_[hash] = std::move(text); }
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<std::uint64_t, std::string>& table() const { return table_; }

  StageResponse handle(const StageRequest& req) const;

  static std::string unknown_sentinel(std::uint64_t hash);

 private:
  std::unordered_map<std::uint64_t, std::string> table_;
};

// Stand-in translator: greedy longest-match phrase dictionary over
// whitespace tokens; unmatched tokens pass through.
class MockMt {
 public:
  // Seeded with the built-in romanized dialect/standard example pairs.
  MockMt();

  // Flat JSON object {"dialect phrase": "standard phrase", ...}.
  static MockMt from_file(const std::filesystem::path& path);
  void load_dictionary(const std::filesystem::path& path);
  void add(std::string_view source, std::string_view target);

  std::string translate(std::string_view text) const;
  StageResponse handle(const StageRequest& req) const;

  static const std::vector<std::pair<std::string, std::string>>& builtin_pairs();
  std::size_t size() const { return phrases_.size(); }

 private:
  std::map<std::vector<std::string>, std::string> phrases_;
  std::size_t longest_ = 0;
};

// Stand-in synthesizer: one 0.2 s sine per token at
// 200 + (token_index mod 16) * 50 Hz, 16 kHz.
class MockTts {
 public:
  static constexpr std::int64_t kSamplesPerToken = 3200;
  static constexpr double kAmplitude = 0.5;

  // Throws EmptyText.
  static AudioSignal synthesize(std::string_view text);
  StageResponse handle(const StageRequest& req) const;
};

struct MockSuite {
  MockAsr asr;
  MockMt mt;
  MockTts tts;

  // Optional asr_fixtures.jsonl and mt_dict.json inside `dir`.
  static MockSuite from_dir(const std::filesystem::path& dir);
  static MockSuite from_files(const std::filesystem::path& asr_fixtures,
                              const std::filesystem::path& mt_dict);

  // Routes by request stage; validation failures and mock errors come back
  // as error envelopes, never as exceptions.
  StageResponse dispatch(const StageRequest& req) const;
};

inline constexpr std::string_view kAsrFixturesFile = "asr_fixtures.jsonl";
inline constexpr std::string_view kMtDictFile = "mt_dict.json";

// In-process backend over one stage of a shared mock suite.
class MockBackend : public StageBackend {
 public:
  MockBackend(std::shared_ptr<const MockSuite> suite, Stage stage,
              std::set<std::string> fail_ids = {})
      : suite_(std::move(suite)), stage_(stage), fail_ids_(std::move(fail_ids)) {}

  StageResponse call(const StageRequest& req) override;
  std::string describe() const override;

 private:
  std::shared_ptr<const MockSuite> suite_;
  Stage stage_;
  std::set<std::string> fail_ids_;
};

}  // namespace speechstd
