#include "profiler/engine/http_api.hpp"

#include <charconv>
#include <filesystem>

#include "httplib.h"
#include "json.hpp"
#include "profiler/errors.hpp"

namespace profiler::engine {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, json const& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, std::string const& message) {
  send_json(res, {{"error", {{"code", error_code_name(code)}, {"message", message}}}}, http_status(code));
}

/// Wraps a handler so every profiler::Error, JSON error or stray exception
/// becomes a JSON error response instead of a dropped connection.
template <class Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler = std::move(handler)](httplib::Request const& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (Error const& e) {
      send_error(res, e.code(), e.what());
    } catch (json::exception const& e) {
      send_error(res, ErrorCode::kValidationError, std::string("bad JSON: ") + e.what());
    } catch (std::exception const& e) {
      send_json(res, {{"error", {{"code", "Internal"}, {"message", e.what()}}}}, 500);
    }
  };
}

json parse_body(httplib::Request const& req) {
  try {
    return json::parse(req.body);
  } catch (json::parse_error const& e) {
    throw Error(ErrorCode::kValidationError, std::string("request body is not JSON: ") + e.what());
  }
}

std::size_t parse_size(std::string const& text, char const* name) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kValidationError, std::string("query parameter '") + name + "' must be a non-negative integer");
  }
  return value;
}

bool parse_flag(std::string const& text, char const* name) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(ErrorCode::kValidationError, std::string("field '") + name + "' must be true or false");
}

char parse_separator(std::string const& text) {
  if (text == "\\t" || text == "tab" || text == "\t") return '\t';
  if (text.size() != 1) throw Error(ErrorCode::kValidationError, "separator must be a single character");
  return text[0];
}

/// Upload fields come from multipart parts or, for scripted clients, from a
/// JSON body {"name", "content", "separator", "has_header", "format"}.
UploadRequest upload_request(httplib::Request const& req) {
  UploadRequest upload;
  auto apply = [&](std::string const& key, std::string const& value) {
    if (key == "name") {
      upload.name = value;
    } else if (key == "separator") {
      upload.separator = parse_separator(value);
    } else if (key == "has_header") {
      upload.has_header = parse_flag(value, "has_header");
    } else if (key == "format") {
      if (value == "table") {
        upload.format = DatasetFormat::kTable;
      } else if (value == "transactions") {
        upload.format = DatasetFormat::kTransactions;
      } else {
        throw Error(ErrorCode::kValidationError, "format must be table or transactions");
      }
    } else if (key != "file" && key != "content") {
      throw Error(ErrorCode::kValidationError, "unknown upload field '" + key + "'");
    }
  };
  if (req.is_multipart_form_data()) {
    if (!req.has_file("file")) throw Error(ErrorCode::kValidationError, "multipart field 'file' is required");
    auto file = req.get_file_value("file");
    upload.content = file.content;
    upload.name = std::filesystem::path(file.filename).stem().string();
    for (auto const& [key, part] : req.files) apply(key, part.content);
    return upload;
  }
  auto body = parse_body(req);
  if (!body.is_object() || !body.contains("content") || !body.at("content").is_string()) {
    throw Error(ErrorCode::kValidationError, "upload needs a multipart 'file' or a JSON string 'content'");
  }
  upload.content = body.at("content").get<std::string>();
  for (auto const& [key, value] : body.items()) {
    if (key == "has_header" && value.is_boolean()) {
      upload.has_header = value.get<bool>();
    } else if (key != "content") {
      if (!value.is_string()) throw Error(ErrorCode::kValidationError, "upload field '" + key + "' must be a string");
      apply(key, value.get<std::string>());
    }
  }
  return upload;
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kUnknownDataset:
    case ErrorCode::kUnknownTask:
    case ErrorCode::kFileNotFound:
      return 404;
    case ErrorCode::kNotFinished:
    case ErrorCode::kAlreadyFinished:
    case ErrorCode::kStaleDecision:
      return 409;
    case ErrorCode::kImmutableDataset:
      return 403;
    case ErrorCode::kStorageFull:
      return 507;
    case ErrorCode::kResourceLimitExceeded:
      return 503;
    default:
      return 400;
  }
}

HttpApi::HttpApi(Engine& engine) : engine_(engine), server_(std::make_unique<httplib::Server>()) { routes(); }

HttpApi::~HttpApi() { stop(); }

void HttpApi::routes() {
  auto& server = *server_;
  auto& registry = engine_.registry();
  auto& tasks = engine_.tasks();

  server.Post("/api/datasets", guarded([&](httplib::Request const& req, httplib::Response& res) {
                send_json(res, to_json(registry.upload(upload_request(req)), true), 201);
              }));
  server.Get("/api/datasets", guarded([&](httplib::Request const&, httplib::Response& res) {
               json out = json::array();
               for (auto const& entry : registry.list()) out.push_back(to_json(entry));
               send_json(res, out);
             }));
  server.Get(R"(/api/datasets/([^/]+))", guarded([&](httplib::Request const& req, httplib::Response& res) {
               send_json(res, to_json(registry.get(req.matches[1])));
             }));
  server.Get(R"(/api/datasets/([^/]+)/snippet)", guarded([&](httplib::Request const& req, httplib::Response& res) {
               auto entry = registry.get(req.matches[1]);
               send_json(res, {{"id", entry.id},
                               {"columns", entry.column_names},
                               {"rows", to_json(entry, true).at("snippet")},
                               {"row_count", entry.row_count}});
             }));
  server.Delete(R"(/api/datasets/([^/]+))", guarded([&](httplib::Request const& req, httplib::Response& res) {
                  registry.remove(req.matches[1]);
                  send_json(res, {{"deleted", std::string(req.matches[1])}});
                }));
  server.Post(R"(/api/datasets/([^/]+)/fixes)", guarded([&](httplib::Request const& req, httplib::Response& res) {
                auto body = parse_body(req);
                if (!body.is_object() || !body.contains("decisions")) {
                  throw Error(ErrorCode::kValidationError, "body needs 'decisions'");
                }
                TaskSpec spec;
                spec.kind = TaskKind::kApplyFixes;
                spec.dataset_ids = {req.matches[1]};
                spec.params = {{"decisions", body.at("decisions")}};
                validate_task_spec(spec, false);
                registry.get(spec.dataset_ids.front());
                ExecutionControl control;
                auto result = execute_task(spec, registry_inputs(registry), control);
                send_json(res, result.summary.at("dataset"), 201);
              }));

  server.Get("/api/kinds", guarded([&](httplib::Request const&, httplib::Response& res) {
               json out = json::object();
               for (auto kind : all_task_kinds()) {
                 out[std::string(task_kind_name(kind))] = accepted_params(kind, engine_.config().allow_fault_injection);
               }
               send_json(res, out);
             }));
  server.Post("/api/tasks", guarded([&](httplib::Request const& req, httplib::Response& res) {
                auto id = tasks.submit(parse_task_spec(parse_body(req)));
                send_json(res, to_json(tasks.poll(id)), 201);
              }));
  server.Get("/api/tasks", guarded([&](httplib::Request const&, httplib::Response& res) {
               json out = json::array();
               for (auto const& status : tasks.list()) out.push_back(to_json(status));
               send_json(res, out);
             }));
  server.Get(R"(/api/tasks/([^/]+))", guarded([&](httplib::Request const& req, httplib::Response& res) {
               send_json(res, to_json(tasks.poll(req.matches[1])));
             }));
  server.Get(R"(/api/tasks/([^/]+)/result)", guarded([&](httplib::Request const& req, httplib::Response& res) {
               ResultQuery query;
               if (req.has_param("sort")) query.sort = req.get_param_value("sort");
               if (req.has_param("filter")) query.filter = req.get_param_value("filter");
               if (req.has_param("page")) query.page = parse_size(req.get_param_value("page"), "page");
               if (req.has_param("page_size")) {
                 query.page_size = parse_size(req.get_param_value("page_size"), "page_size");
               }
               auto page = tasks.result(req.matches[1], query);
               auto body = to_json(page);
               body["task_id"] = std::string(req.matches[1]);
               send_json(res, body);
             }));
  server.Post(R"(/api/tasks/([^/]+)/cancel)", guarded([&](httplib::Request const& req, httplib::Response& res) {
                send_json(res, to_json(tasks.cancel(req.matches[1])));
              }));

  server.set_error_handler([](httplib::Request const& req, httplib::Response& res) {
    if (res.status == 404 && req.path.starts_with("/api/") && res.body.empty()) {
      send_json(res, {{"error", {{"code", "NotFound"}, {"message", "no route for " + req.method + " " + req.path}}}},
                404);
    }
  });
  if (auto const& dir = engine_.config().static_dir) server.set_mount_point("/", dir->string());
}

int HttpApi::bind(std::string const& host, int port) {
  if (port == 0) {
    port = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::kValidationError, "cannot bind " + host);
  return port;
}

void HttpApi::serve() { server_->listen_after_bind(); }

void HttpApi::start() {
  thread_ = std::jthread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpApi::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace profiler::engine
