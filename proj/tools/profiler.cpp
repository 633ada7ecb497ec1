// Command-line front end: one subcommand per task kind plus `serve`.

#include <algorithm>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "profiler/csv.hpp"
#include "profiler/engine/config.hpp"
#include "profiler/engine/executors.hpp"
#include "profiler/engine/http_api.hpp"
#include "profiler/engine/results.hpp"
#include "profiler/engine/task.hpp"
#include "profiler/errors.hpp"
#include "profiler/fd.hpp"

namespace {

using nlohmann::json;
using namespace profiler;
using namespace profiler::engine;

struct CommonOptions {
  std::vector<std::string> datasets;
  std::string separator = ",";
  bool has_header = true;
  bool null_distinct = false;
  unsigned threads = 1;
  std::string sort_by;
  std::string filter;
  bool as_json = false;
  std::int64_t time_budget_ms = 0;
  std::int64_t memory_budget_mb = 0;
};

struct KindOptions {
  std::string algo;
  std::optional<double> error;
  std::optional<std::size_t> max_lhs;
  std::string lhs;
  std::string rhs;
  std::string metric;
  std::optional<double> delta;
  std::string dependent;
  std::string referenced;
  std::optional<std::size_t> max_missing;
  std::optional<std::size_t> spill_threshold;
  std::optional<double> min_support;
  std::optional<double> min_confidence;
  std::string input_format;
};

std::vector<std::string> split_list(std::string const& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

char separator_char(std::string const& text) {
  if (text == "\\t" || text == "tab") return '\t';
  if (text.size() != 1) throw Error(ErrorCode::kValidationError, "--separator must be a single character");
  return text[0];
}

json build_params(TaskKind kind, CommonOptions const& common, KindOptions const& k) {
  json p = json::object();
  p["separator"] = std::string(1, separator_char(common.separator));
  p["has_header"] = common.has_header;
  if (kind != TaskKind::kMineRules) p["null_equal"] = !common.null_distinct;
  if (kind != TaskKind::kValidateFd && kind != TaskKind::kValidateInd) p["threads"] = common.threads;
  if (common.time_budget_ms > 0) p["time_budget_ms"] = common.time_budget_ms;
  if (common.memory_budget_mb > 0) p["memory_budget_mb"] = common.memory_budget_mb;
  if (!k.algo.empty()) p["algo"] = k.algo;
  if (k.error) p["error"] = *k.error;
  if (k.max_lhs) p["max_lhs"] = *k.max_lhs;
  if (!k.lhs.empty() || kind == TaskKind::kValidateFd || kind == TaskKind::kValidateMfd) {
    p["lhs"] = split_list(k.lhs);
  }
  if (!k.rhs.empty()) p["rhs"] = kind == TaskKind::kValidateMfd ? json(split_list(k.rhs)) : json(k.rhs);
  if (!k.metric.empty()) p["metric"] = k.metric;
  if (k.delta) p["delta"] = *k.delta;
  if (kind == TaskKind::kValidateMfd && !common.sort_by.empty()) p["sort"] = common.sort_by;
  if (!k.dependent.empty()) p["dependent"] = k.dependent;
  if (!k.referenced.empty()) p["referenced"] = k.referenced;
  if (k.max_missing) p["max_missing"] = *k.max_missing;
  if (k.spill_threshold) p["spill_threshold"] = *k.spill_threshold;
  if (k.min_support) p["min_support"] = *k.min_support;
  if (k.min_confidence) p["min_confidence"] = *k.min_confidence;
  if (!k.input_format.empty()) p["input_format"] = k.input_format;
  return p;
}

TaskInputs file_inputs() {
  TaskInputs in;
  in.table = [](std::string const& path, TableOptions const& options) {
    return std::make_shared<Table const>(parse_csv(path, options));
  };
  in.text = [](std::string const& path) { return read_file(path); };
  return in;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

std::string json_text(json const& v) { return v.is_string() ? v.get<std::string>() : v.is_null() ? "NULL" : v.dump(); }

/// The console cluster screen for MFD validation: a header, then one block
/// per violating cluster with outlier rows marked "x".
void print_mfd_screen(TaskResult const& result, std::vector<std::size_t> const& order) {
  auto const& s = result.summary;
  auto join = [](json const& names) {
    std::string out;
    for (auto const& n : names) out += (out.empty() ? "" : ", ") + n.get<std::string>();
    return out;
  };
  std::cout << "MFD [" << join(s.at("lhs")) << "] -> [" << join(s.at("rhs")) << "]"
            << "  metric=" << s.at("metric").get<std::string>() << "  delta=" << format_real(s.at("delta"))
            << "\n";
  std::cout << (s.at("holds").get<bool>() ? "HOLDS" : "DOES NOT HOLD") << ": " << order.size()
            << " violating cluster(s), sorted by " << s.at("sort").get<std::string>() << "\n";
  std::size_t n = 0;
  for (auto i : order) {
    auto const& c = result.items[i].data;
    std::string lhs;
    for (std::size_t k = 0; k < c.at("lhs_value").size(); ++k) {
      lhs += (k ? ", " : "") + s.at("lhs")[k].get<std::string>() + "=" + json_text(c.at("lhs_value")[k]);
    }
    std::cout << "\nCluster " << ++n << ": " << lhs << "  (" << c.at("size").get<std::size_t>()
              << " points, diameter " << format_real(c.at("diameter")) << ", " << c.at("outlier_count").get<std::size_t>()
              << " outlier(s))\n";
    std::cout << "     " << pad("row", 8) << pad("value", 24) << pad("min dist", 12) << "max dist\n";
    for (auto const& p : c.at("points")) {
      std::cout << (p.at("outlier").get<bool>() ? "  x  " : "     ") << pad(std::to_string(p.at("row").get<std::size_t>()), 8)
                << pad(p.at("value").get<std::string>(), 24) << pad(format_real(p.at("min_distance")), 12)
                << format_real(p.at("max_distance")) << "\n";
    }
  }
}

void print_summary(TaskKind kind, json const& s) {
  switch (kind) {
    case TaskKind::kValidateFd:
      std::cout << s.at("fd").get<std::string>() << ": " << (s.at("holds").get<bool>() ? "holds" : "does not hold")
                << " at threshold " << format_real(s.at("threshold")) << ", " << s.at("cluster_count")
                << " violating cluster(s)\n";
      break;
    case TaskKind::kValidateInd:
      std::cout << s.at("ind").get<std::string>() << ": " << (s.at("holds").get<bool>() ? "holds" : "does not hold")
                << "\n";
      break;
    default:
      break;
  }
}

int run_task(TaskKind kind, CommonOptions const& common, KindOptions const& k) {
  TaskSpec spec;
  spec.kind = kind;
  spec.dataset_ids = common.datasets;
  spec.params = build_params(kind, common, k);
  validate_task_spec(spec, false);

  ExecutionControl control;
  if (common.time_budget_ms > 0) control.set_time_budget(std::chrono::milliseconds(common.time_budget_ms));
  if (common.memory_budget_mb > 0) control.set_memory_budget(static_cast<std::size_t>(common.memory_budget_mb) << 20);
  auto result = execute_task(spec, file_inputs(), control);

  // For MFD the sort flag picks the cluster order, applied by the executor.
  auto order = select_items(result, kind == TaskKind::kValidateMfd ? "" : common.sort_by, common.filter);
  if (common.as_json) {
    json items = json::array();
    for (auto i : order) items.push_back({{"data", result.items[i].data}, {"text", result.items[i].text}});
    std::cout << json{{"kind", task_kind_name(kind)}, {"summary", result.summary}, {"items", items}}.dump(2) << "\n";
    return 0;
  }
  if (kind == TaskKind::kValidateMfd) {
    print_mfd_screen(result, order);
    return 0;
  }
  print_summary(kind, result.summary);
  for (auto i : order) std::cout << result.items[i].text << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data profiler: discovers and validates dependencies, rules and statistics in CSV data."};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "Engine configuration file (JSON), used by serve");

  CommonOptions common;
  KindOptions k;
  std::optional<TaskKind> chosen;

  auto add_common = [&](CLI::App* sub, bool multi) {
    auto* ds = sub->add_option("--dataset,-d", common.datasets, multi ? "CSV file (repeatable)" : "CSV file")->required();
    if (!multi) ds->expected(1);
    sub->add_option("--separator,-s", common.separator, "Field separator; \\t or tab for tabs")->capture_default_str();
    sub->add_flag("--has-header,!--no-header", common.has_header, "First row holds column names (default)");
    sub->add_option("--sort-by", common.sort_by, "Order results by a field; prefix - for descending");
    sub->add_option("--filter", common.filter, "Keep results whose text matches this regex");
    sub->add_flag("--json", common.as_json, "Print JSON instead of text lines");
    sub->add_option("--time-budget-ms", common.time_budget_ms, "Abort after this many milliseconds");
    sub->add_option("--memory-budget-mb", common.memory_budget_mb, "Abort when tracked memory exceeds this");
  };
  auto add_threads = [&](CLI::App* sub) { sub->add_option("--threads,-t", common.threads, "Worker threads")->check(CLI::Range(1, 256)); };
  auto add_nulls = [&](CLI::App* sub) { sub->add_flag("--null-distinct", common.null_distinct, "Treat every null as unique"); };
  auto subcommand = [&](TaskKind kind, std::string const& description) {
    std::string name(task_kind_name(kind));
    auto* sub = app.add_subcommand(name, description);
    std::string dashed = name;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    sub->alias(dashed);
    sub->callback([&chosen, kind] { chosen = kind; });
    return sub;
  };

  auto* fd = subcommand(TaskKind::kDiscoverFd, "Discover minimal exact or approximate functional dependencies");
  add_common(fd, false);
  add_threads(fd);
  add_nulls(fd);
  fd->add_option("--algo", k.algo, "Discovery algorithm")->check(CLI::IsMember({"tane"}));
  fd->add_option("--error,-e", k.error, "Maximum g3 error, 0 for exact dependencies");
  fd->add_option("--max-lhs", k.max_lhs, "Largest left-hand side");

  auto* vfd = subcommand(TaskKind::kValidateFd, "Check one functional dependency and list violating clusters");
  add_common(vfd, false);
  add_nulls(vfd);
  vfd->add_option("--lhs", k.lhs, "Left-hand side columns, comma separated")->required();
  vfd->add_option("--rhs", k.rhs, "Right-hand side column")->required();
  vfd->add_option("--error,-e", k.error, "Threshold for 'holds'");

  auto* mfd = subcommand(TaskKind::kValidateMfd, "Check a metric functional dependency (cluster screen)");
  add_common(mfd, false);
  add_threads(mfd);
  add_nulls(mfd);
  mfd->add_option("--lhs", k.lhs, "Left-hand side columns, comma separated")->required();
  mfd->add_option("--rhs", k.rhs, "Right-hand side column(s), comma separated")->required();
  mfd->add_option("--metric", k.metric, "absolute-difference, euclidean or levenshtein")->required();
  mfd->add_option("--delta", k.delta, "Largest allowed distance")->required();

  auto* ind = subcommand(TaskKind::kDiscoverInd, "Discover unary inclusion dependencies across datasets");
  add_common(ind, true);
  add_threads(ind);
  add_nulls(ind);
  ind->add_option("--spill-threshold", k.spill_threshold, "Distinct values kept in memory per column");

  auto* vind = subcommand(TaskKind::kValidateInd, "Check one inclusion dependency");
  add_common(vind, true);
  add_nulls(vind);
  vind->add_option("--dependent", k.dependent, "table.column whose values must be contained")->required();
  vind->add_option("--referenced", k.referenced, "table.column that must contain them")->required();
  vind->add_option("--max-missing", k.max_missing, "Missing values to show");

  auto* arm = subcommand(TaskKind::kMineRules, "Mine frequent itemsets and association rules");
  add_common(arm, false);
  add_threads(arm);
  arm->add_option("--min-support", k.min_support, "Minimum support as a fraction")->required();
  arm->add_option("--min-confidence", k.min_confidence, "Minimum rule confidence");
  arm->add_option("--algo", k.algo, "apriori or fpgrowth")->check(CLI::IsMember({"apriori", "fpgrowth", "fp-growth"}));
  arm->add_option("--input-format", k.input_format, "tabular (one transaction per row) or singular (tid,item rows)")
      ->check(CLI::IsMember({"tabular", "singular"}));

  auto* stats = subcommand(TaskKind::kProfileStats, "Per-column statistics");
  add_common(stats, false);
  add_threads(stats);
  add_nulls(stats);

  EngineConfig overrides;
  std::string data_dir, builtin_dir, static_dir;
  std::optional<unsigned> workers;
  std::optional<int> port;
  std::string host;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--data-dir", data_dir, "Dataset and task storage");
  serve->add_option("--builtin-dir", builtin_dir, "Directory of built-in CSV datasets");
  serve->add_option("--static-dir", static_dir, "Web UI files served at /");
  serve->add_option("--workers,-w", workers, "Concurrent tasks");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port,-p", port, "Listen port, 0 for any free port");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e);
  }

  try {
    if (serve->parsed()) {
      auto config = load_engine_config(config_file.empty() ? std::nullopt
                                                           : std::optional<std::filesystem::path>(config_file));
      if (!data_dir.empty()) config.data_dir = data_dir;
      if (!builtin_dir.empty()) config.builtin_dir = builtin_dir;
      if (!static_dir.empty()) config.static_dir = static_dir;
      if (workers) config.workers = *workers;
      if (!host.empty()) config.host = host;
      if (port) config.port = *port;
      config.validate();
      Engine engine(config);
      HttpApi api(engine);
      auto bound = api.bind(config.host, config.port);
      std::cout << "listening on http://" << config.host << ":" << bound << std::endl;
      api.serve();
      return 0;
    }
    return run_task(*chosen, common, k);
  } catch (Error const& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
