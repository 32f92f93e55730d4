#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace speechstd {

enum class ErrorKind {
  // audio-io
  MalformedContainer,
  UnsupportedEncoding,
  EmptyAudio,
  NotStandardized,
  IoFailure,
  // denoise
  TooShort,
  ProfileMismatch,
  InvalidParams,
  // segmenter
  ZeroChunks,
  AnnotationMismatch,
  // corpus
  SchemaViolation,
  MissingAudio,
  InsufficientRecords,
  // metrics
  DivisionByEmptyReference,
  LengthMismatch,
  EmptyCorpus,
  // stage protocol
  InvalidRequest,
  Timeout,
  Unreachable,
  IdMismatch,
  RemoteError,
  EmptyText,
  // pipeline
  NoBackends,
  AllChunksFailed,
  MissingReference,
  // cli / config
  Usage,
  ConfigSyntax,
};

// Exit code buckets used by the command-line tool.
enum class ErrorClass { Usage = 1, Data = 2, Backend = 3 };

std::string_view to_string(ErrorKind kind);
ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace speechstd
