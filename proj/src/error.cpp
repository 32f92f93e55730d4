#include "speechstd/error.hpp"

namespace speechstd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedContainer: return "MalformedContainer";
    case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::EmptyAudio: return "EmptyAudio";
    case ErrorKind::NotStandardized: return "NotStandardized";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::ProfileMismatch: return "ProfileMismatch";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::ZeroChunks: return "ZeroChunks";
    case ErrorKind::AnnotationMismatch: return "AnnotationMismatch";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::MissingAudio: return "MissingAudio";
    case ErrorKind::InsufficientRecords: return "InsufficientRecords";
    case ErrorKind::DivisionByEmptyReference: return "DivisionByEmptyReference";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InvalidRequest: return "InvalidRequest";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::RemoteError: return "RemoteError";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::NoBackends: return "NoBackends";
    case ErrorKind::AllChunksFailed: return "AllChunksFailed";
    case ErrorKind::MissingReference: return "MissingReference";
    case ErrorKind::Usage: return "Usage";
    case ErrorKind::ConfigSyntax: return "ConfigSyntax";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
      return ErrorClass::Usage;
    case ErrorKind::Timeout:
    case ErrorKind::Unreachable:
    case ErrorKind::IdMismatch:
    case ErrorKind::RemoteError:
    case ErrorKind::NoBackends:
    case ErrorKind::AllChunksFailed:
      return ErrorClass::Backend;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace speechstd
