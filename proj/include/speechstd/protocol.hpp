#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "speechstd/audio.hpp"

namespace speechstd {

inline constexpr std::string_view kProtocolVersion = "v1";

enum class Stage { Asr, Mt, Tts };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);  // throws InvalidRequest

// Wire message, orchestrator -> stage backend. Payload fields by stage:
//   asr: sample_rate + audio_b64 (16-bit LE PCM, no header)
//   mt:  text
//   tts: text, optional sample_rate hint
struct StageRequest {
  Stage stage = Stage::Asr;
  std::string id;  // "parent:k"
  std::optional<int> sample_rate;
  std::optional<std::string> audio_b64;
  std::optional<std::string> text;

  // Throws InvalidRequest when a field of another stage is present or a
  // required one is missing.
  void validate() const;
  friend bool operator==(const StageRequest&, const StageRequest&) = default;
};

struct RemoteErrorInfo {
  std::string code;
  std::string message;
  friend bool operator==(const RemoteErrorInfo&, const RemoteErrorInfo&) = default;
};

// Stable error codes carried in the error envelope.
namespace error_code {
inline constexpr std::string_view kInvalidRequest = "invalid_request";
inline constexpr std::string_view kEmptyText = "empty_text";
inline constexpr std::string_view kStageUnavailable = "stage_unavailable";
inline constexpr std::string_view kInjectedFailure = "injected_failure";
inline constexpr std::string_view kInternal = "internal";
}  // namespace error_code

struct StageResponse {
  std::string id;
  std::optional<std::string> text;
  std::optional<std::string> audio_b64;
  std::optional<int> sample_rate;
  std::optional<RemoteErrorInfo> error;

  static StageResponse failure(std::string id, std::string_view code, std::string message);

  // Error and payload are mutually exclusive; id is always present.
  void validate() const;
  friend bool operator==(const StageResponse&, const StageResponse&) = default;
};

nlohmann::json to_json(const StageRequest& r);
nlohmann::json to_json(const StageResponse& r);
StageRequest request_from_json(const nlohmann::json& j);    // throws InvalidRequest
StageResponse response_from_json(const nlohmann::json& j);  // throws InvalidRequest

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);  // throws InvalidRequest

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::string hex64(std::uint64_t v);

StageRequest make_asr_request(std::string id, const AudioSignal& chunk);
StageRequest make_text_request(Stage stage, std::string id, std::string text);

// Decodes a response's PCM payload; sample_rate defaults to 16 kHz.
AudioSignal response_audio(const StageResponse& r);

// Anything that answers stage requests: an in-process mock or a remote
// HTTP server.
class StageBackend {
 public:
  virtual ~StageBackend() = default;
  // Remote failures may come back either as a thrown Error or as a
  // response carrying an error envelope.
  virtual StageResponse call(const StageRequest& req) = 0;
  virtual bool healthy() { return true; }
  virtual std::string describe() const = 0;
};

}  // namespace speechstd
