#include "profiler/engine/registry.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

#include "profiler/csv.hpp"
#include "profiler/errors.hpp"

namespace profiler::engine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kBuiltinPrefix = "builtin-";
constexpr std::string_view kIdPrefix = "ds-";

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

json cell_json(Cell const& cell) { return cell ? json(*cell) : json(nullptr); }

std::string_view format_name(DatasetFormat format) {
  return format == DatasetFormat::kTable ? "table" : "transactions";
}

DatasetFormat parse_format(std::string_view name) {
  if (name == "table") return DatasetFormat::kTable;
  if (name == "transactions") return DatasetFormat::kTransactions;
  throw Error(ErrorCode::kValidationError, "unknown dataset format '" + std::string(name) + "'");
}

DatasetOrigin parse_origin(std::string_view name) {
  if (name == "built-in") return DatasetOrigin::kBuiltin;
  if (name == "uploaded") return DatasetOrigin::kUploaded;
  if (name == "revision") return DatasetOrigin::kRevision;
  throw Error(ErrorCode::kValidationError, "unknown dataset origin '" + std::string(name) + "'");
}

/// Fills row/column counts, names and snippet from the file content. Throws
/// the parser's errors for content that is not a valid dataset.
void describe(DatasetEntry& entry, std::string const& content, std::size_t snippet_rows) {
  entry.size_bytes = content.size();
  entry.snippet.clear();
  if (entry.format == DatasetFormat::kTable) {
    auto table = parse_csv_text(content, {entry.has_header, entry.separator, NullMode::kNullEqual}, entry.name);
    entry.row_count = table.row_count();
    entry.column_count = table.column_count();
    entry.column_names = table.column_names();
    auto rows = std::min(snippet_rows, table.row_count());
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<Cell> row;
      for (std::size_t c = 0; c < table.column_count(); ++c) {
        auto v = table.cell(r, c);
        row.push_back(v ? Cell(std::string(*v)) : Cell());
      }
      entry.snippet.push_back(std::move(row));
    }
    return;
  }
  check_separator(entry.separator);
  auto records = tokenize_csv(content, entry.separator, true).records;
  std::size_t first = entry.has_header && !records.empty() ? 1 : 0;
  if (records.size() <= first) throw Error(ErrorCode::kEmptyInput, "no transactions");
  entry.row_count = records.size() - first;
  entry.column_count = 0;
  for (auto const& r : records) entry.column_count = std::max(entry.column_count, r.size());
  entry.column_names.clear();
  if (first == 1) {
    for (auto const& cell : records[0]) entry.column_names.push_back(cell.value_or(""));
  }
  for (std::size_t r = first; r < records.size() && entry.snippet.size() < snippet_rows; ++r) {
    entry.snippet.push_back(records[r]);
  }
}

void write_file(fs::path const& path, std::string const& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kStorageFull, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json meta_json(DatasetEntry const& entry) {
  return {
      {"id", entry.id},
      {"name", entry.name},
      {"origin", origin_name(entry.origin)},
      {"format", format_name(entry.format)},
      {"parent_id", entry.parent_id ? json(*entry.parent_id) : json(nullptr)},
      {"separator", std::string(1, entry.separator)},
      {"has_header", entry.has_header},
      {"modified_rows", entry.modified_rows},
      {"created_ms", entry.created_ms},
  };
}

}  // namespace

std::string_view origin_name(DatasetOrigin origin) noexcept {
  switch (origin) {
    case DatasetOrigin::kBuiltin:
      return "built-in";
    case DatasetOrigin::kUploaded:
      return "uploaded";
    case DatasetOrigin::kRevision:
      return "revision";
  }
  return "uploaded";
}

json to_json(DatasetEntry const& entry, bool with_snippet) {
  json out = meta_json(entry);
  out.erase("modified_rows");
  out["size_bytes"] = entry.size_bytes;
  out["row_count"] = entry.row_count;
  out["column_count"] = entry.column_count;
  out["columns"] = entry.column_names;
  if (entry.origin == DatasetOrigin::kRevision) out["modified_rows"] = entry.modified_rows;
  if (with_snippet) {
    json rows = json::array();
    for (auto const& row : entry.snippet) {
      json r = json::array();
      for (auto const& cell : row) r.push_back(cell_json(cell));
      rows.push_back(std::move(r));
    }
    out["snippet"] = std::move(rows);
  }
  return out;
}

DatasetRegistry::DatasetRegistry(EngineConfig const& config) : config_(config) {
  fs::create_directories(config_.data_dir / "datasets");
  register_builtins();
  restore();
}

void DatasetRegistry::register_builtins() {
  if (!config_.builtin_dir) return;
  if (!fs::is_directory(*config_.builtin_dir)) {
    throw Error(ErrorCode::kFileNotFound, "builtin_dir " + config_.builtin_dir->string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (auto const& item : fs::directory_iterator(*config_.builtin_dir)) {
    auto ext = item.path().extension();
    if (item.is_regular_file() && (ext == ".csv" || ext == ".tsv")) files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());
  for (auto const& file : files) {
    DatasetEntry entry;
    entry.id = std::string(kBuiltinPrefix) + file.stem().string();
    entry.name = file.stem().string();
    entry.origin = DatasetOrigin::kBuiltin;
    entry.path = file;
    entry.separator = file.extension() == ".tsv" ? '\t' : ',';
    entry.created_ms = now_ms();
    describe(entry, read_file(file), config_.snippet_rows);
    entries_.emplace(entry.id, std::move(entry));
  }
}

void DatasetRegistry::restore() {
  auto root = config_.data_dir / "datasets";
  for (auto const& item : fs::directory_iterator(root)) {
    auto meta_path = item.path() / "meta.json";
    auto data_path = item.path() / "data.csv";
    if (!item.is_directory() || !fs::exists(meta_path) || !fs::exists(data_path)) continue;
    auto meta = json::parse(read_file(meta_path));
    DatasetEntry entry;
    entry.id = meta.at("id").get<std::string>();
    entry.name = meta.at("name").get<std::string>();
    entry.origin = parse_origin(meta.at("origin").get<std::string>());
    entry.format = parse_format(meta.value("format", "table"));
    if (!meta.at("parent_id").is_null()) entry.parent_id = meta.at("parent_id").get<std::string>();
    entry.separator = meta.at("separator").get<std::string>().at(0);
    entry.has_header = meta.at("has_header").get<bool>();
    entry.modified_rows = meta.value("modified_rows", std::vector<std::size_t>{});
    entry.created_ms = meta.value("created_ms", std::int64_t{0});
    entry.path = data_path;
    describe(entry, read_file(data_path), config_.snippet_rows);
    if (entry.id.starts_with(kIdPrefix)) {
      try {
        next_number_ = std::max<std::uint64_t>(next_number_, std::stoull(entry.id.substr(kIdPrefix.size())) + 1);
      } catch (std::exception const&) {
      }
    }
    entries_.insert_or_assign(entry.id, std::move(entry));
  }
}

std::string DatasetRegistry::next_id() { return std::string(kIdPrefix) + std::to_string(next_number_++); }

std::uint64_t DatasetRegistry::stored_bytes() const {
  std::uint64_t total = 0;
  for (auto const& [id, entry] : entries_) {
    if (entry.origin != DatasetOrigin::kBuiltin) total += entry.size_bytes;
  }
  return total;
}

DatasetEntry DatasetRegistry::store(DatasetEntry entry, std::string const& content) {
  std::lock_guard lock(mutex_);
  if (config_.max_storage_bytes != 0 && stored_bytes() + content.size() > config_.max_storage_bytes) {
    throw Error(ErrorCode::kStorageFull, "storing " + std::to_string(content.size()) + " bytes would exceed the " +
                                             std::to_string(config_.max_storage_bytes) + "-byte limit");
  }
  entry.id = next_id();
  entry.created_ms = now_ms();
  auto dir = config_.data_dir / "datasets" / entry.id;
  fs::create_directories(dir);
  entry.path = dir / "data.csv";
  write_file(entry.path, content);
  write_file(dir / "meta.json", meta_json(entry).dump(2));
  entries_.emplace(entry.id, entry);
  return entry;
}

DatasetEntry DatasetRegistry::upload(UploadRequest const& request) {
  DatasetEntry entry;
  entry.name = request.name.empty() ? "dataset" : request.name;
  entry.origin = DatasetOrigin::kUploaded;
  entry.format = request.format;
  entry.separator = request.separator;
  entry.has_header = request.has_header;
  describe(entry, request.content, config_.snippet_rows);
  return store(std::move(entry), request.content);
}

std::vector<DatasetEntry> DatasetRegistry::list() const {
  std::lock_guard lock(mutex_);
  std::vector<DatasetEntry> out;
  for (auto const& [id, entry] : entries_) out.push_back(entry);
  std::sort(out.begin(), out.end(), [](DatasetEntry const& a, DatasetEntry const& b) {
    return a.created_ms != b.created_ms ? a.created_ms < b.created_ms : a.id < b.id;
  });
  return out;
}

DatasetEntry const& DatasetRegistry::find(std::string const& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::kUnknownDataset, "unknown dataset '" + id + "'");
  return it->second;
}

DatasetEntry DatasetRegistry::get(std::string const& id) const {
  std::lock_guard lock(mutex_);
  return find(id);
}

void DatasetRegistry::remove(std::string const& id) {
  std::lock_guard lock(mutex_);
  auto const& entry = find(id);
  if (entry.origin == DatasetOrigin::kBuiltin) {
    throw Error(ErrorCode::kImmutableDataset, "built-in dataset '" + id + "' cannot be deleted");
  }
  fs::remove_all(entry.path.parent_path());
  std::erase_if(cache_, [&](auto const& item) { return item.first.starts_with(id + "\n"); });
  entries_.erase(id);
}

std::string DatasetRegistry::text(std::string const& id) const {
  fs::path path;
  {
    std::lock_guard lock(mutex_);
    path = find(id).path;
  }
  return read_file(path);
}

std::shared_ptr<Table const> DatasetRegistry::table(std::string const& id, std::optional<char> separator,
                                                    std::optional<bool> has_header, NullMode null_mode) {
  DatasetEntry entry;
  std::string key;
  {
    std::lock_guard lock(mutex_);
    entry = find(id);
    if (entry.format != DatasetFormat::kTable) {
      throw Error(ErrorCode::kTypeMismatch, "dataset '" + id + "' holds transactions, not a table");
    }
    TableOptions options{has_header.value_or(entry.has_header), separator.value_or(entry.separator), null_mode};
    key = id + "\n" + options.separator + (options.has_header ? "h" : "n") +
          (null_mode == NullMode::kNullEqual ? "e" : "d");
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    entry.separator = options.separator;
    entry.has_header = options.has_header;
  }
  auto table = std::make_shared<Table const>(
      parse_csv_text(read_file(entry.path), {entry.has_header, entry.separator, null_mode}, entry.name));
  std::lock_guard lock(mutex_);
  if (entries_.count(id) != 0) cache_.emplace(key, table);
  return table;
}

DatasetEntry DatasetRegistry::apply_fixes(std::string const& id, std::span<FixDecision const> decisions) {
  std::lock_guard lineage(fixes_mutex_);
  DatasetEntry parent;
  std::set<std::size_t> touched;
  {
    std::lock_guard lock(mutex_);
    parent = find(id);
    for (auto const& d : decisions) touched.insert(d.row);
    // Every revision derived from `id`, at any depth.
    for (auto const& [other_id, other] : entries_) {
      bool descendant = false;
      for (auto p = other.parent_id; p; p = entries_.count(*p) ? entries_.at(*p).parent_id : std::nullopt) {
        if (*p == id) {
          descendant = true;
          break;
        }
      }
      if (!descendant) continue;
      for (auto row : other.modified_rows) {
        if (touched.count(row) != 0) {
          throw Error(ErrorCode::kStaleDecision, "row " + std::to_string(row) + " of '" + id +
                                                     "' was already modified in revision '" + other_id + "'");
        }
      }
    }
  }
  auto source = table(id);
  auto fixed = profiler::apply_fixes(*source, decisions);

  DatasetEntry entry;
  entry.name = parent.name;
  entry.origin = DatasetOrigin::kRevision;
  entry.format = DatasetFormat::kTable;
  entry.parent_id = id;
  entry.separator = parent.separator;
  entry.has_header = parent.has_header;
  std::set<std::size_t> modified;
  for (auto const& d : decisions) {
    if (!d.keep) modified.insert(d.row);
  }
  entry.modified_rows.assign(modified.begin(), modified.end());
  auto content = to_csv(fixed);
  describe(entry, content, config_.snippet_rows);
  return store(std::move(entry), content);
}

}  // namespace profiler::engine
