#include "profiler/errors.hpp"

namespace profiler {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kMalformedCsv: return "MalformedCsv";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kSourceMismatch: return "SourceMismatch";
    case ErrorCode::kResourceLimitExceeded: return "ResourceLimitExceeded";
    case ErrorCode::kCancelled: return "Cancelled";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kUnknownTable: return "UnknownTable";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kEmptyTransactions: return "EmptyTransactions";
    case ErrorCode::kNotDownwardClosed: return "NotDownwardClosed";
    case ErrorCode::kStaleDecision: return "StaleDecision";
    case ErrorCode::kStorageFull: return "StorageFull";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kUnknownDataset: return "UnknownDataset";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kNotFinished: return "NotFinished";
    case ErrorCode::kBadRegex: return "BadRegex";
    case ErrorCode::kAlreadyFinished: return "AlreadyFinished";
    case ErrorCode::kImmutableDataset: return "ImmutableDataset";
  }
  return "Unknown";
}

MalformedCsvError::MalformedCsvError(std::size_t row, std::string const& reason)
    : Error(ErrorCode::kMalformedCsv, "malformed CSV at row " + std::to_string(row) + ": " + reason),
      row_(row) {}

}  // namespace profiler
