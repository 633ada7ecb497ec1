#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "profiler/table.hpp"

namespace profiler {

/// Row-major result of tokenizing RFC 4180 text.
struct CsvRecords {
  std::vector<std::vector<Cell>> records;
};

/// Splits `text` into records. Quoted fields may contain the separator, quotes
/// (doubled) and line breaks. An empty unquoted field is null, a quoted empty
/// field is the empty string. Trailing blank lines are ignored. Unless
/// `allow_ragged`, every record must have the first record's field count.
/// Throws MalformedCsvError.
CsvRecords tokenize_csv(std::string_view text, char separator, bool allow_ragged = false);

/// Throws Error{kValidationError} unless `separator` is a single printable
/// character other than the quote.
void check_separator(char separator);

Table parse_csv_text(std::string_view text, TableOptions options, std::string name = "");

/// Throws Error{kFileNotFound}, MalformedCsvError, Error{kEmptyInput}.
Table parse_csv(std::filesystem::path const& path, TableOptions options);

std::string read_file(std::filesystem::path const& path);

/// Serializes with the table's separator and header flag, quoting only when
/// needed so that parse_csv_text(to_csv(t)) reproduces every cell.
std::string to_csv(Table const& table);

}  // namespace profiler
