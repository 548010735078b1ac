#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace testkg {

/// Error categories shared across the toolkit. Each value maps onto one
/// failure mode of the public operations; messages carry the detail.
enum class Errc {
  InvalidIri,
  InvalidBlankLabel,
  InvalidLiteral,
  InvalidTriple,
  UnknownPrefix,
  TooManyBlankNodes,
  SyntaxError,
  Unsupported,
  MalformedQuery,
  InconsistentVocabulary,
  InvalidConfiguration,
  ShapeViolation,
  EmptyConfiguration,
  DanglingReference,
  TemplateMismatch,
  InvalidTimestamp,
  CyclicSuite,
  NonMonotoneTimestamps,
  ArityMismatch,
  UnmappedColumn,
  NonNumericValue,
  UnresolvedReference,
  InvalidNominal,
  InvalidSpec,
  EmptySeries,
  WindowTooLong,
  ChannelMissing,
  ChecksumMismatch,
  IoError,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidIri: return "InvalidIri";
    case Errc::InvalidBlankLabel: return "InvalidBlankLabel";
    case Errc::InvalidLiteral: return "InvalidLiteral";
    case Errc::InvalidTriple: return "InvalidTriple";
    case Errc::UnknownPrefix: return "UnknownPrefix";
    case Errc::TooManyBlankNodes: return "TooManyBlankNodes";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::Unsupported: return "Unsupported";
    case Errc::MalformedQuery: return "MalformedQuery";
    case Errc::InconsistentVocabulary: return "InconsistentVocabulary";
    case Errc::InvalidConfiguration: return "InvalidConfiguration";
    case Errc::ShapeViolation: return "ShapeViolation";
    case Errc::EmptyConfiguration: return "EmptyConfiguration";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::TemplateMismatch: return "TemplateMismatch";
    case Errc::InvalidTimestamp: return "InvalidTimestamp";
    case Errc::CyclicSuite: return "CyclicSuite";
    case Errc::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::UnmappedColumn: return "UnmappedColumn";
    case Errc::NonNumericValue: return "NonNumericValue";
    case Errc::UnresolvedReference: return "UnresolvedReference";
    case Errc::InvalidNominal: return "InvalidNominal";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::WindowTooLong: return "WindowTooLong";
    case Errc::ChannelMissing: return "ChannelMissing";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Source position of a diagnostic, 1-based.
struct Position {
  int line = 0;
  int column = 0;
};

/// The one exception type thrown by the library. Parse-type errors carry a
/// position; everything else just a code and message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Error(Errc code, const std::string& message, Position pos)
      : std::runtime_error(std::string(errc_name(code)) + " at line " +
                           std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + message),
        code_(code),
        message_(message),
        pos_(pos) {}

  Errc code() const noexcept { return code_; }
  /// Message without the code/position prefix that what() adds.
  const std::string& message() const noexcept { return message_; }
  const std::optional<Position>& position() const noexcept { return pos_; }

 private:
  Errc code_;
  std::string message_;
  std::optional<Position> pos_;
};

}  // namespace testkg
