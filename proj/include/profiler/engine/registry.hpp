#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "profiler/engine/config.hpp"
#include "profiler/table.hpp"
#include "profiler/typo.hpp"

namespace profiler::engine {

enum class DatasetOrigin { kBuiltin, kUploaded, kRevision };

std::string_view origin_name(DatasetOrigin origin) noexcept;

/// "table" data must be rectangular; "transactions" may be ragged and is
/// only usable by mine_rules.
enum class DatasetFormat { kTable, kTransactions };

struct DatasetEntry {
  std::string id;
  std::string name;
  DatasetOrigin origin = DatasetOrigin::kUploaded;
  DatasetFormat format = DatasetFormat::kTable;
  std::optional<std::string> parent_id;  // revisions only
  std::filesystem::path path;
  char separator = ',';
  bool has_header = true;
  std::uint64_t size_bytes = 0;
  std::size_t row_count = 0;
  std::size_t column_count = 0;
  std::vector<std::string> column_names;
  std::vector<std::vector<Cell>> snippet;  // row-major, first snippet_rows rows
  std::vector<std::size_t> modified_rows;  // revisions only, ascending
  std::int64_t created_ms = 0;             // unix epoch
};

nlohmann::json to_json(DatasetEntry const& entry, bool with_snippet = false);

struct UploadRequest {
  std::string name;
  std::string content;
  char separator = ',';
  bool has_header = true;
  DatasetFormat format = DatasetFormat::kTable;
};

/// File-backed dataset library. Every entry lives in
/// data_dir/datasets/<id>/{data.csv,meta.json}; built-ins are registered from
/// builtin_dir at startup under "builtin-<stem>" and are never written to.
/// Constructing a registry over an existing data_dir restores all uploads
/// and revisions.
class DatasetRegistry {
 public:
  explicit DatasetRegistry(EngineConfig const& config);

  /// Throws MalformedCsv / EmptyInput when the content does not parse (nothing
  /// is registered) and StorageFull when it would exceed max_storage_bytes.
  DatasetEntry upload(UploadRequest const& request);
  std::vector<DatasetEntry> list() const;
  DatasetEntry get(std::string const& id) const;  // UnknownDataset
  void remove(std::string const& id);              // UnknownDataset, ImmutableDataset

  /// Parses the stored file with the given options; results are cached per
  /// (id, options) and shared.
  std::shared_ptr<Table const> table(std::string const& id, std::optional<char> separator = std::nullopt,
                                     std::optional<bool> has_header = std::nullopt,
                                     NullMode null_mode = NullMode::kNullEqual);
  std::string text(std::string const& id) const;

  /// Creates a revision of `id` with the decisions applied. Throws
  /// StaleDecision when a revision derived from `id` already modified one of
  /// the rows, IndexOutOfRange for bad cells. Revisions of one lineage are
  /// created one at a time.
  DatasetEntry apply_fixes(std::string const& id, std::span<FixDecision const> decisions);

 private:
  DatasetEntry const& find(std::string const& id) const;
  void register_builtins();
  void restore();
  DatasetEntry store(DatasetEntry entry, std::string const& content);
  std::uint64_t stored_bytes() const;
  std::string next_id();

  EngineConfig config_;
  mutable std::mutex mutex_;
  std::mutex fixes_mutex_;
  std::map<std::string, DatasetEntry> entries_;
  std::map<std::string, std::shared_ptr<Table const>> cache_;
  std::uint64_t next_number_ = 1;
};

}  // namespace profiler::engine
