#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace profiler {

enum class ErrorCode {
  kFileNotFound,
  kMalformedCsv,
  kEmptyInput,
  kIndexOutOfRange,
  kSourceMismatch,
  kResourceLimitExceeded,
  kCancelled,
  kTypeMismatch,
  kUnknownTable,
  kUnknownColumn,
  kEmptyTransactions,
  kNotDownwardClosed,
  kStaleDecision,
  kStorageFull,
  kValidationError,
  kUnknownDataset,
  kUnknownTask,
  kNotFinished,
  kBadRegex,
  kAlreadyFinished,
  kImmutableDataset,
};

/// Machine-readable name, e.g. "MalformedCsv". Used verbatim in API error bodies.
std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedCsvError : public Error {
 public:
  MalformedCsvError(std::size_t row, std::string const& reason);

  /// 0-based record index in the file (the header, if any, is record 0).
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace profiler
