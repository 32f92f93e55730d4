#include "speechstd/protocol.hpp"

#include <array>
#include <cstdio>

#include "speechstd/error.hpp"

namespace speechstd {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Asr: return "asr";
    case Stage::Mt: return "mt";
    case Stage::Tts: return "tts";
  }
  return "asr";
}

Stage parse_stage(std::string_view s) {
  if (s == "asr") return Stage::Asr;
  if (s == "mt") return Stage::Mt;
  if (s == "tts") return Stage::Tts;
  throw Error(ErrorKind::InvalidRequest, "unknown stage '" + std::string(s) + "'");
}

void StageRequest::validate() const {
  auto reject = [&](const std::string& why) {
    return Error(ErrorKind::InvalidRequest, std::string(to_string(stage)) + " request '" + id + "': " + why);
  };
  if (id.empty()) throw reject("empty id");
  switch (stage) {
    case Stage::Asr:
      if (!audio_b64) throw reject("missing audio_b64");
      if (!sample_rate || *sample_rate <= 0) throw reject("missing or non-positive sample_rate");
      if (text) throw reject("text is not an asr input");
      break;
    case Stage::Mt:
      if (!text) throw reject("missing text");
      if (audio_b64) throw reject("audio_b64 is not an mt input");
      if (sample_rate) throw reject("sample_rate is not an mt input");
      break;
    case Stage::Tts:
      if (!text) throw reject("missing text");
      if (audio_b64) throw reject("audio_b64 is not a tts input");
      if (sample_rate && *sample_rate <= 0) throw reject("non-positive sample_rate");
      break;
  }
}

StageResponse StageResponse::failure(std::string id, std::string_view code, std::string message) {
  StageResponse r;
  r.id = std::move(id);
  r.error = RemoteErrorInfo{std::string(code), std::move(message)};
  return r;
}

void StageResponse::validate() const {
  if (id.empty()) throw Error(ErrorKind::InvalidRequest, "response without id");
  const bool payload = text || audio_b64;
  if (error && payload) throw Error(ErrorKind::InvalidRequest, "response '" + id + "' has both error and payload");
  if (!error && !payload) throw Error(ErrorKind::InvalidRequest, "response '" + id + "' has neither error nor payload");
  if (text && audio_b64) throw Error(ErrorKind::InvalidRequest, "response '" + id + "' has both text and audio");
}

nlohmann::json to_json(const StageRequest& r) {
  nlohmann::json j;
  j["stage"] = std::string(to_string(r.stage));
  j["id"] = r.id;
  if (r.sample_rate) j["sample_rate"] = *r.sample_rate;
  if (r.audio_b64) j["audio_b64"] = *r.audio_b64;
  if (r.text) j["text"] = *r.text;
  return j;
}

nlohmann::json to_json(const StageResponse& r) {
  nlohmann::json j;
  j["id"] = r.id;
  if (r.text) j["text"] = *r.text;
  if (r.audio_b64) j["audio_b64"] = *r.audio_b64;
  if (r.sample_rate) j["sample_rate"] = *r.sample_rate;
  if (r.error) j["error"] = {{"code", r.error->code}, {"message", r.error->message}};
  return j;
}

namespace {

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw Error(ErrorKind::InvalidRequest, std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::optional<int> opt_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number_integer()) throw Error(ErrorKind::InvalidRequest, std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

}  // namespace

StageRequest request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidRequest, "request must be a JSON object");
  StageRequest r;
  const auto stage = opt_string(j, "stage");
  if (!stage) throw Error(ErrorKind::InvalidRequest, "missing 'stage'");
  r.stage = parse_stage(*stage);
  r.id = opt_string(j, "id").value_or("");
  r.sample_rate = opt_int(j, "sample_rate");
  r.audio_b64 = opt_string(j, "audio_b64");
  r.text = opt_string(j, "text");
  return r;
}

StageResponse response_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidRequest, "response must be a JSON object");
  StageResponse r;
  r.id = opt_string(j, "id").value_or("");
  r.text = opt_string(j, "text");
  r.audio_b64 = opt_string(j, "audio_b64");
  r.sample_rate = opt_int(j, "sample_rate");
  if (j.contains("error") && !j["error"].is_null()) {
    const auto& e = j["error"];
    if (!e.is_object()) throw Error(ErrorKind::InvalidRequest, "'error' must be an object");
    r.error = RemoteErrorInfo{opt_string(e, "code").value_or(""), opt_string(e, "message").value_or("")};
  }
  return r;
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest) {
    const std::uint32_t v = (bytes[i] << 16) | (rest == 2 ? bytes[i + 1] << 8 : 0);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorKind::InvalidRequest, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int d;
      if (c == '=' && last && k >= 2) {
        d = 0;
        ++pad;
      } else {
        if (pad) throw Error(ErrorKind::InvalidRequest, "base64 data after padding");
        d = decode_char(c);
        if (d < 0) throw Error(ErrorKind::InvalidRequest, "invalid base64 character");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf.data(), 16);
}

StageRequest make_asr_request(std::string id, const AudioSignal& chunk) {
  StageRequest r;
  r.stage = Stage::Asr;
  r.id = std::move(id);
  r.sample_rate = chunk.sample_rate();
  r.audio_b64 = base64_encode(to_pcm16le(chunk.samples()));
  return r;
}

StageRequest make_text_request(Stage stage, std::string id, std::string text) {
  StageRequest r;
  r.stage = stage;
  r.id = std::move(id);
  r.text = std::move(text);
  if (stage == Stage::Tts) r.sample_rate = kCorpusSampleRate;
  return r;
}

AudioSignal response_audio(const StageResponse& r) {
  if (!r.audio_b64) throw Error(ErrorKind::InvalidRequest, "response '" + r.id + "' carries no audio");
  const auto bytes = base64_decode(*r.audio_b64);
  if (bytes.size() % 2) throw Error(ErrorKind::InvalidRequest, "odd PCM byte count");
  return AudioSignal(from_pcm16le(bytes), r.sample_rate.value_or(kCorpusSampleRate), r.id);
}

}  // namespace speechstd
