#include "profiler/csv.hpp"

#include <fstream>
#include <sstream>

#include "profiler/errors.hpp"

namespace profiler {

void check_separator(char separator) {
  auto u = static_cast<unsigned char>(separator);
  bool printable = u == '\t' || (u >= 0x20 && u < 0x7f);
  if (!printable || separator == '"') {
    throw Error(ErrorCode::kValidationError, "separator must be a single printable character other than '\"'");
  }
}

CsvRecords tokenize_csv(std::string_view text, char separator, bool allow_ragged) {
  check_separator(separator);
  CsvRecords out;
  std::vector<Cell> record;
  std::string field;
  bool field_quoted = false;
  std::size_t pos = 0;
  std::size_t const n = text.size();
  if (n >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

  auto end_field = [&] {
    if (field.empty() && !field_quoted) {
      record.emplace_back(std::nullopt);
    } else {
      record.emplace_back(std::move(field));
    }
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    std::size_t row = out.records.size();
    if (!allow_ragged && !out.records.empty() && record.size() != out.records.front().size()) {
      throw MalformedCsvError(row, "expected " + std::to_string(out.records.front().size()) + " fields, got " +
                                       std::to_string(record.size()));
    }
    out.records.push_back(std::move(record));
    record.clear();
  };

  while (pos < n) {
    char c = text[pos];
    // Trailing blank lines terminate input.
    if ((c == '\n' || c == '\r') && record.empty() && field.empty() && !field_quoted &&
        text.find_first_not_of("\r\n", pos) == std::string_view::npos) {
      break;
    }
    if (c == '"' && field.empty() && !field_quoted) {
      field_quoted = true;
      std::size_t start_row = out.records.size();
      ++pos;
      for (;;) {
        if (pos >= n) throw MalformedCsvError(start_row, "unterminated quoted field");
        char q = text[pos++];
        if (q == '"') {
          if (pos < n && text[pos] == '"') {
            field.push_back('"');
            ++pos;
          } else {
            break;
          }
        } else {
          field.push_back(q);
        }
      }
      if (pos < n && text[pos] != separator && text[pos] != '\n' && text[pos] != '\r') {
        throw MalformedCsvError(out.records.size(), "unexpected character after closing quote");
      }
      continue;
    }
    if (c == separator) {
      end_field();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      end_record();
      ++pos;
      if (c == '\r' && pos < n && text[pos] == '\n') ++pos;
    } else if (field_quoted) {
      throw MalformedCsvError(out.records.size(), "unexpected character after closing quote");
    } else {
      if (c == '"') throw MalformedCsvError(out.records.size(), "quote inside unquoted field");
      field.push_back(c);
      ++pos;
    }
  }
  if (!record.empty() || !field.empty() || field_quoted) end_record();
  return out;
}

Table parse_csv_text(std::string_view text, TableOptions options, std::string name) {
  auto parsed = tokenize_csv(text, options.separator);
  auto& records = parsed.records;
  std::vector<std::string> names;
  std::size_t first_data = 0;
  if (options.has_header) {
    if (records.empty()) throw Error(ErrorCode::kEmptyInput, "input has no header row");
    for (auto& cell : records.front()) names.push_back(cell.value_or(""));
    first_data = 1;
  }
  if (records.size() <= first_data) throw Error(ErrorCode::kEmptyInput, "input has no data rows");

  std::size_t width = records.front().size();
  std::vector<std::vector<Cell>> columns(width);
  for (auto& column : columns) column.reserve(records.size() - first_data);
  for (std::size_t r = first_data; r < records.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) columns[c].push_back(std::move(records[r][c]));
  }
  return Table(std::move(name), std::move(names), columns, options);
}

std::string read_file(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Table parse_csv(std::filesystem::path const& path, TableOptions options) {
  return parse_csv_text(read_file(path), options, path.stem().string());
}

namespace {

void append_field(std::string& out, std::optional<std::string_view> value, char separator) {
  if (!value) return;
  bool quote = value->empty() || value->find_first_of(std::string{separator, '"', '\n', '\r'}) != std::string_view::npos;
  if (!quote) {
    out += *value;
    return;
  }
  out.push_back('"');
  for (char c : *value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string to_csv(Table const& table) {
  std::string out;
  char sep = table.separator();
  auto const& columns = table.columns();
  if (table.has_header()) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out.push_back(sep);
      append_field(out, columns[c].name(), sep);
    }
    out.push_back('\n');
  }
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out.push_back(sep);
      append_field(out, columns[c].value(r), sep);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace profiler
