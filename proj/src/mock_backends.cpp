#include "speechstd/mock_backends.hpp"

#include <cmath>
#include <numbers>

#include "speechstd/error.hpp"
#include "speechstd/io.hpp"
#include "speechstd/text.hpp"

namespace speechstd {

namespace {

void require_stage(const StageRequest& req, Stage stage) {
  if (req.stage != stage) {
    throw Error(ErrorKind::InvalidRequest, "request for " + std::string(to_string(req.stage)) + " sent to the " +
                                               std::string(to_string(stage)) + " mock");
  }
  req.validate();
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.empty() || s.size() > 16) throw Error(ErrorKind::SchemaViolation, "bad fnv1a64 value '" + s + "'");
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used, 16);
  if (used != s.size()) throw Error(ErrorKind::SchemaViolation, "bad fnv1a64 value '" + s + "'");
  return v;
}

}  // namespace

std::string MockAsr::unknown_sentinel(std::uint64_t hash) { return "‹unk:" + hex64(hash) + "›"; }

MockAsr MockAsr::from_file(const std::filesystem::path& path) {
  MockAsr asr;
  const std::string content = read_file(path);
  std::size_t line_no = 0, start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const std::string line = content.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      asr.add(parse_hex64(j.at("fnv1a64").get<std::string>()), j.at("text").get<std::string>());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::SchemaViolation, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return asr;
}

StageResponse MockAsr::handle(const StageRequest& req) const {
  require_stage(req, Stage::Asr);
  const auto pcm = base64_decode(*req.audio_b64);
  const std::uint64_t h = fnv1a64(pcm);
  StageResponse r;
  r.id = req.id;
  auto it = table_.find(h);
  r.text = it != table_.end() ? it->second : unknown_sentinel(h);
  return r;
}

const std::vector<std::pair<std::string, std::string>>& MockMt::builtin_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"Anne konai jan", "Apne kothay jan"},
      {"Science tun vala result koichi", "Science theke valo result korechi"},
      {"Bait kichu kam ase hellai aichi", "Barite kichu kaj ase tai esechi"},
      {"Ekmasher moto jaitami harina", "Ekmasher moto jatei parina"},
      {"Hete koto khn dhori boi ase", "She koto kokhn dhore bose ache"},
  };
  return pairs;
}

MockMt::MockMt() {
  for (const auto& [src, dst] : builtin_pairs()) add(src, dst);
}

void MockMt::add(std::string_view source, std::string_view target) {
  auto key = text::tokenize(source);
  if (key.empty()) return;
  longest_ = std::max(longest_, key.size());
  phrases_[std::move(key)] = text::nfc(target);
}

void MockMt::load_dictionary(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::SchemaViolation, path.string() + ": expected a JSON object");
  for (const auto& [src, dst] : j.items()) {
    if (!dst.is_string()) throw Error(ErrorKind::SchemaViolation, path.string() + ": value for '" + src + "' is not a string");
    add(src, dst.get<std::string>());
  }
}

MockMt MockMt::from_file(const std::filesystem::path& path) {
  MockMt mt;
  mt.load_dictionary(path);
  return mt;
}

std::string MockMt::translate(std::string_view input) const {
  const auto tokens = text::tokenize(input);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    for (std::size_t len = std::min(longest_, tokens.size() - i); len >= 1; --len) {
      std::vector<std::string> key(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (auto it = phrases_.find(key); it != phrases_.end()) {
        if (!it->second.empty()) out.push_back(it->second);
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(tokens[i++]);
  }
  return text::join(out);
}

StageResponse MockMt::handle(const StageRequest& req) const {
  require_stage(req, Stage::Mt);
  StageResponse r;
  r.id = req.id;
  r.text = translate(*req.text);
  return r;
}

AudioSignal MockTts::synthesize(std::string_view input) {
  const auto tokens = text::tokenize(input);
  if (tokens.empty()) throw Error(ErrorKind::EmptyText, "nothing to synthesize");
  std::vector<double> samples;
  samples.reserve(tokens.size() * kSamplesPerToken);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const double freq = 200.0 + static_cast<double>(t % 16) * 50.0;
    for (std::int64_t n = 0; n < kSamplesPerToken; ++n) {
      samples.push_back(kAmplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(n) / kCorpusSampleRate));
    }
  }
  return AudioSignal(std::move(samples), kCorpusSampleRate);
}

StageResponse MockTts::handle(const StageRequest& req) const {
  require_stage(req, Stage::Tts);
  const AudioSignal audio = synthesize(*req.text);
  StageResponse r;
  r.id = req.id;
  r.audio_b64 = base64_encode(to_pcm16le(audio.samples()));
  r.sample_rate = audio.sample_rate();
  return r;
}

MockSuite MockSuite::from_files(const std::filesystem::path& asr_fixtures, const std::filesystem::path& mt_dict) {
  MockSuite suite;
  if (!asr_fixtures.empty()) suite.asr = MockAsr::from_file(asr_fixtures);
  if (!mt_dict.empty()) suite.mt.load_dictionary(mt_dict);
  return suite;
}

MockSuite MockSuite::from_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::IoFailure, "mock directory " + dir.string() + " not found");
  const auto asr = dir / kAsrFixturesFile;
  const auto mt = dir / kMtDictFile;
  return from_files(std::filesystem::exists(asr) ? asr : std::filesystem::path(),
                    std::filesystem::exists(mt) ? mt : std::filesystem::path());
}

StageResponse MockSuite::dispatch(const StageRequest& req) const {
  try {
    switch (req.stage) {
      case Stage::Asr: return asr.handle(req);
      case Stage::Mt: return mt.handle(req);
      case Stage::Tts: return tts.handle(req);
    }
  } catch (const Error& e) {
    const std::string_view code = e.kind() == ErrorKind::EmptyText      ? error_code::kEmptyText
                                  : e.kind() == ErrorKind::InvalidRequest ? error_code::kInvalidRequest
                                                                          : error_code::kInternal;
    return StageResponse::failure(req.id, code, e.what());
  } catch (const std::exception& e) {
    return StageResponse::failure(req.id, error_code::kInternal, e.what());
  }
  return StageResponse::failure(req.id, error_code::kInternal, "unknown stage");
}

StageResponse MockBackend::call(const StageRequest& req) {
  if (req.stage != stage_) {
    throw Error(ErrorKind::InvalidRequest, "backend for " + std::string(to_string(stage_)) + " got a " +
                                               std::string(to_string(req.stage)) + " request");
  }
  req.validate();
  if (fail_ids_.count(req.id)) {
    return StageResponse::failure(req.id, error_code::kInjectedFailure, "injected failure for " + req.id);
  }
  return suite_->dispatch(req);
}

std::string MockBackend::describe() const { return "mock:" + std::string(to_string(stage_)); }

}  // namespace speechstd
