#include <fstream>

#include "doctest.h"
#include "engine_support.hpp"
#include "httplib.h"
#include "profiler/engine/http_api.hpp"

using namespace profiler::engine;
using nlohmann::json;
using profiler::testing::slow_fd_csv;
using profiler::testing::t1_csv;
using profiler::testing::TempDir;

namespace {

/// Engine plus API on an ephemeral port, with a client pointed at it.
struct Server {
  explicit Server(TempDir const& dir, unsigned workers = 2) : engine(make_config(dir, workers)), api(engine) {
    port = api.bind("127.0.0.1", 0);
    api.start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(30, 0);
  }

  static EngineConfig make_config(TempDir const& dir, unsigned workers) {
    EngineConfig config;
    config.data_dir = dir.path() / "data";
    config.workers = workers;
    auto builtins = dir.path() / "builtin";
    std::filesystem::create_directories(builtins);
    std::ofstream(builtins / "t1.csv") << t1_csv();
    config.builtin_dir = builtins;
    return config;
  }

  json get(std::string const& path, int expect = 200) {
    auto res = client->Get(path);
    REQUIRE(res);
    INFO(path << " -> " << res->body);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }

  json post(std::string const& path, json const& body, int expect) {
    auto res = client->Post(path, body.dump(), "application/json");
    REQUIRE(res);
    INFO(path << " -> " << res->body);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }

  json finished(std::string const& task) {
    for (int i = 0; i < 3000; ++i) {
      auto status = get("/api/tasks/" + task);
      auto state = status.at("state").get<std::string>();
      if (state != "queued" && state != "running") return status;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    FAIL("task did not finish");
    return {};
  }

  Engine engine;
  HttpApi api;
  int port = 0;
  std::unique_ptr<httplib::Client> client;
};

std::string error_code(json const& body) { return body.at("error").at("code").get<std::string>(); }

}  // namespace

TEST_CASE("datasets can be uploaded, listed, previewed and deleted") {
  TempDir dir;
  Server server(dir);
  httplib::MultipartFormDataItems form{{"file", t1_csv(), "t1.csv", "text/csv"}, {"separator", ",", "", ""}};
  auto res = server.client->Post("/api/datasets", form);
  REQUIRE(res);
  CHECK(res->status == 201);
  auto entry = json::parse(res->body);
  auto id = entry.at("id").get<std::string>();
  CHECK(entry.at("name") == "t1");
  CHECK(entry.at("origin") == "uploaded");
  CHECK(entry.at("snippet").size() == 4);

  auto via_json = server.post("/api/datasets", {{"name", "again"}, {"content", t1_csv()}}, 201);
  CHECK(via_json.at("id") != id);

  auto list = server.get("/api/datasets");
  CHECK(list.size() == 3);
  auto snippet = server.get("/api/datasets/" + id + "/snippet");
  CHECK(snippet.at("columns") == json{"A", "B", "C"});
  CHECK(snippet.at("rows").size() == 4);
  CHECK(snippet.at("rows")[1][2] == "y");
  CHECK(server.get("/api/datasets/builtin-t1").at("origin") == "built-in");

  auto bad = server.post("/api/datasets", {{"name", "bad"}, {"content", "a,b\n1\n"}}, 400);
  CHECK(error_code(bad) == "MalformedCsv");
  CHECK(server.get("/api/datasets").size() == 3);

  auto del = server.client->Delete("/api/datasets/" + id);
  REQUIRE(del);
  CHECK(del->status == 200);
  CHECK(error_code(server.get("/api/datasets/" + id, 404)) == "UnknownDataset");
  auto builtin = server.client->Delete("/api/datasets/builtin-t1");
  REQUIRE(builtin);
  CHECK(builtin->status == 403);
  CHECK(error_code(json::parse(builtin->body)) == "ImmutableDataset");
}

TEST_CASE("tasks are submitted, polled and paged over HTTP") {
  TempDir dir;
  Server server(dir);
  auto created = server.post("/api/tasks",
                             {{"kind", "discover_fd"}, {"datasets", {"builtin-t1"}}, {"params", {{"error", 0.25}}}}, 201);
  auto task = created.at("id").get<std::string>();
  CHECK(created.at("kind") == "discover_fd");
  auto status = server.finished(task);
  CHECK(status.at("state") == "done");
  CHECK(status.at("progress") == 1.0);

  auto page = server.get("/api/tasks/" + task + "/result?filter=%5E%5C%5BA%5C%5D&sort=-error&page_size=1");
  CHECK(page.at("task_id") == task);
  CHECK(page.at("page") == 0);
  CHECK(page.at("page_size") == 1);
  CHECK(page.at("total_count").get<int>() >= 2);
  REQUIRE(page.at("items").size() == 1);
  CHECK(page.at("items")[0].at("text").get<std::string>().starts_with("[A]"));
  CHECK(page.at("items")[0].at("data").at("error") == 0.25);

  auto empty = server.get("/api/tasks/" + task + "/result?page=50");
  CHECK(empty.at("items").empty());
  CHECK(error_code(server.get("/api/tasks/" + task + "/result?filter=%28%5B", 400)) == "BadRegex");
  CHECK(error_code(server.get("/api/tasks/" + task + "/result?page=x", 400)) == "ValidationError");
  CHECK(error_code(server.post("/api/tasks/" + task + "/cancel", json::object(), 409)) == "AlreadyFinished");
  CHECK(error_code(server.get("/api/tasks/task-999", 404)) == "UnknownTask");
  CHECK(server.get("/api/tasks").size() == 1);

  auto invalid = server.post("/api/tasks", {{"kind", "discover_fd"}, {"datasets", "builtin-t1"}, {"params", {{"error", 1.5}}}}, 400);
  CHECK(error_code(invalid) == "ValidationError");
  CHECK(error_code(server.post("/api/tasks", {{"kind", "discover_fd"}, {"datasets", "nope"}}, 404)) ==
        "UnknownDataset");
  auto not_json = server.client->Post("/api/tasks", "{", "application/json");
  REQUIRE(not_json);
  CHECK(not_json->status == 400);
  CHECK(error_code(server.get("/api/nothing-here", 404)) == "NotFound");

  auto kinds = server.get("/api/kinds");
  CHECK(kinds.size() == 9);
  CHECK(kinds.contains("validate_mfd"));
}

TEST_CASE("a running task can be cancelled over HTTP and results wait for it") {
  TempDir dir;
  Server server(dir, 1);
  auto slow = server.post("/api/datasets", {{"name", "slow"}, {"content", slow_fd_csv()}}, 201).at("id").get<std::string>();
  auto task = server.post("/api/tasks", {{"kind", "discover_fd"}, {"datasets", slow}}, 201).at("id").get<std::string>();
  for (int i = 0; i < 1000 && server.get("/api/tasks/" + task).at("state") != "running"; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  CHECK(error_code(server.get("/api/tasks/" + task + "/result", 409)) == "NotFinished");
  auto cancelled = server.post("/api/tasks/" + task + "/cancel", json::object(), 200);
  CHECK(cancelled.at("id") == task);
  CHECK(server.finished(task).at("state") == "cancelled");
}

TEST_CASE("fixes endpoint creates revisions and rejects stale decisions") {
  TempDir dir;
  Server server(dir);
  json decisions = {{"decisions", {{{"row", 1}, {"column", "C"}, {"value", "x"}}}}};
  auto rev = server.post("/api/datasets/builtin-t1/fixes", decisions, 201);
  CHECK(rev.at("origin") == "revision");
  CHECK(rev.at("parent_id") == "builtin-t1");
  auto rev_id = rev.at("id").get<std::string>();
  CHECK(server.get("/api/datasets/" + rev_id + "/snippet").at("rows")[1][2] == "x");
  CHECK(server.get("/api/datasets/builtin-t1/snippet").at("rows")[1][2] == "y");

  CHECK(error_code(server.post("/api/datasets/builtin-t1/fixes", decisions, 409)) == "StaleDecision");
  CHECK(error_code(server.post("/api/datasets/builtin-t1/fixes", {{"rows", json::array()}}, 400)) ==
        "ValidationError");
  CHECK(error_code(server.post("/api/datasets/missing/fixes", decisions, 404)) == "UnknownDataset");

  auto keep = server.post("/api/datasets/" + rev_id + "/fixes", {{"decisions", json::array()}}, 201);
  CHECK(keep.at("parent_id") == rev_id);
}
