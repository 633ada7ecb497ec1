#pragma once

#include <memory>
#include <string>
#include <thread>

#include "profiler/engine/task_manager.hpp"

namespace httplib {
class Server;
}

namespace profiler::engine {

/// HTTP status used for an error code.
int http_status(ErrorCode code) noexcept;

/// JSON REST API over an Engine:
///
///   POST   /api/datasets                 multipart: file, name, separator, has_header, format
///   GET    /api/datasets
///   GET    /api/datasets/{id}
///   GET    /api/datasets/{id}/snippet
///   DELETE /api/datasets/{id}
///   POST   /api/datasets/{id}/fixes      {"decisions": [...]} -> new revision
///   GET    /api/kinds                    accepted parameters per task kind
///   POST   /api/tasks                    {"kind", "datasets", "params"}
///   GET    /api/tasks
///   GET    /api/tasks/{id}
///   GET    /api/tasks/{id}/result        ?sort=&filter=&page=&page_size=
///   POST   /api/tasks/{id}/cancel
///
/// Errors answer {"error": {"code": "<ErrorCode name>", "message": "..."}}.
class HttpApi {
 public:
  explicit HttpApi(Engine& engine);
  ~HttpApi();
  HttpApi(HttpApi const&) = delete;
  HttpApi& operator=(HttpApi const&) = delete;

  /// Binds the listening socket; port 0 picks a free one. Returns the port.
  int bind(std::string const& host, int port);
  /// Serves on the calling thread until stop().
  void serve();
  /// Serves on a background thread and returns once it accepts connections.
  void start();
  void stop();

 private:
  void routes();

  Engine& engine_;
  std::unique_ptr<httplib::Server> server_;
  std::jthread thread_;
};

}  // namespace profiler::engine
