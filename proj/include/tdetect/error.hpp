#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tdetect {

enum class ErrorCode {
  EmptyInput,
  EmptyCorpus,
  EmptyContent,
  BackendError,
  ProtocolError,
  DegenerateVariance,
  DegenerateCrossEntropy,
  InvalidNu,
  SeriesMismatch,
  DegenerateTraining,
  InsufficientData,
  DegenerateSample,
  FitDiverged,
  DegenerateLabels,
  IngestError,
  InvalidUtf8,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base of every error raised by the library. The code is stable and is what
/// the CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Transport-level failure talking to a remote backend.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, int attempts, bool retryable,
               std::optional<int> http_status = std::nullopt)
      : Error(ErrorCode::BackendError, message),
        attempts_(attempts),
        retryable_(retryable),
        http_status_(http_status) {}

  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept { return retryable_; }
  std::optional<int> http_status() const noexcept { return http_status_; }

 private:
  int attempts_;
  bool retryable_;
  std::optional<int> http_status_;
};

/// A remote response that violates the wire schema or a series invariant.
class ProtocolError : public Error {
 public:
  ProtocolError(std::string field, const std::string& message)
      : Error(ErrorCode::ProtocolError, message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Corpus ingestion failure, pinned to a 1-based line number.
class IngestError : public Error {
 public:
  IngestError(std::string field, std::size_t line, const std::string& detail)
      : Error(ErrorCode::IngestError,
              "line " + std::to_string(line) + ": " + field + ": " + detail),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

}  // namespace tdetect
