#include "profiler/engine/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "json.hpp"
#include "profiler/csv.hpp"
#include "profiler/errors.hpp"

namespace profiler::engine {

namespace {

template <class T>
T parse_env_number(char const* name, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kValidationError, std::string(name) + " is not a number: " + std::string(text));
  }
  return value;
}

template <class T>
void read_key(nlohmann::json const& doc, char const* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (nlohmann::json::exception const&) {
    throw Error(ErrorCode::kValidationError, std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

void EngineConfig::validate() const {
  if (workers == 0) throw Error(ErrorCode::kValidationError, "workers must be at least 1");
  if (time_budget_ms < 0) throw Error(ErrorCode::kValidationError, "time_budget_ms must be >= 0");
  if (memory_budget_mb < 0) throw Error(ErrorCode::kValidationError, "memory_budget_mb must be >= 0");
  if (port < 0 || port > 65535) throw Error(ErrorCode::kValidationError, "port out of range");
}

void apply_environment(EngineConfig& config) {
  if (auto const* v = std::getenv("PROFILER_DATA_DIR"); v != nullptr && *v != '\0') config.data_dir = v;
  if (auto const* v = std::getenv("PROFILER_WORKERS"); v != nullptr && *v != '\0') {
    config.workers = parse_env_number<unsigned>("PROFILER_WORKERS", v);
  }
  if (auto const* v = std::getenv("PROFILER_TIME_BUDGET_MS"); v != nullptr && *v != '\0') {
    config.time_budget_ms = parse_env_number<std::int64_t>("PROFILER_TIME_BUDGET_MS", v);
  }
  if (auto const* v = std::getenv("PROFILER_MEMORY_BUDGET_MB"); v != nullptr && *v != '\0') {
    config.memory_budget_mb = parse_env_number<std::int64_t>("PROFILER_MEMORY_BUDGET_MB", v);
  }
  if (auto const* v = std::getenv("PROFILER_PORT"); v != nullptr && *v != '\0') {
    config.port = parse_env_number<int>("PROFILER_PORT", v);
  }
}

EngineConfig load_engine_config(std::optional<std::filesystem::path> const& file) {
  EngineConfig config;
  if (file) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(*file));
    } catch (nlohmann::json::parse_error const& e) {
      throw Error(ErrorCode::kValidationError, "config " + file->string() + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::kValidationError, "config must be a JSON object");
    static constexpr std::string_view kKeys[] = {"data_dir",         "builtin_dir",      "static_dir",
                                                 "workers",          "time_budget_ms",   "memory_budget_mb",
                                                 "max_storage_bytes", "snippet_rows",    "allow_fault_injection",
                                                 "host",             "port"};
    for (auto const& [key, value] : doc.items()) {
      if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
        throw Error(ErrorCode::kValidationError, "unknown config key '" + key + "'");
      }
    }
    std::string path;
    if (doc.contains("data_dir")) {
      read_key(doc, "data_dir", path);
      config.data_dir = path;
    }
    if (doc.contains("builtin_dir")) {
      read_key(doc, "builtin_dir", path);
      config.builtin_dir = path;
    }
    if (doc.contains("static_dir")) {
      read_key(doc, "static_dir", path);
      config.static_dir = path;
    }
    read_key(doc, "workers", config.workers);
    read_key(doc, "time_budget_ms", config.time_budget_ms);
    read_key(doc, "memory_budget_mb", config.memory_budget_mb);
    read_key(doc, "max_storage_bytes", config.max_storage_bytes);
    read_key(doc, "snippet_rows", config.snippet_rows);
    read_key(doc, "allow_fault_injection", config.allow_fault_injection);
    read_key(doc, "host", config.host);
    read_key(doc, "port", config.port);
  }
  apply_environment(config);
  config.validate();
  return config;
}

}  // namespace profiler::engine
