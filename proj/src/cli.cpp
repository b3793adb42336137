#include "fragkit/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>

#include "CLI11.hpp"
#include "fragkit/callgraph.hpp"
#include "fragkit/errors.hpp"
#include "fragkit/metrics.hpp"
#include "fragkit/token_cache.hpp"
#include "json.hpp"

namespace fragkit {
namespace {

namespace fs = std::filesystem;

struct Session {
  TokenCounter counter;
  std::shared_ptr<TokenCountCache> cache;

  explicit Session(const RunConfig& config) {
    if (config.tokenizer_path) {
      counter = TokenCounter(std::make_shared<const TokenModel>(
          load_token_model(*config.tokenizer_path)));
    }
    if (config.cache_path) {
      cache = std::make_shared<TokenCountCache>(*config.cache_path);
      counter.set_cache(cache, config.verify_cache);
    }
  }

  void finish(const RunConfig& config, std::ostream& err) const {
    if (!cache) return;
    cache->save();
    if (config.verify_cache) {
      err << "verify-cache: " << cache->verified() << " of " << cache->hits()
          << " hits recomputed, no mismatch\n";
    }
  }
};

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (!config.output) {
    out << text;
    return;
  }
  const auto& path = *config.output;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(path.string(), "cannot open for writing");
  f << text;
  if (!f) throw IoError(path.string(), "write failed");
}

std::string project_name(const fs::path& dir) {
  auto name = fs::weakly_canonical(dir).filename().string();
  return name.empty() ? dir.string() : name;
}

void report_diagnostics(const ProjectAnalysis& a, std::ostream& err) {
  for (const auto& d : a.diagnostics) {
    err << "warning: skipped " << d.path << ": " << d.message << "\n";
  }
}

ProjectAnalysis analyze_root(const RunConfig& config, bool default_tests,
                             const Session& session, std::ostream& err) {
  auto files = scan_corpus(config.corpus_root,
                           config.include_tests.value_or(default_tests));
  auto a = analyze_files(project_name(config.corpus_root), std::move(files),
                         ContextBudget{config.window, 0, 0}, session.counter,
                         config.max_in_flight);
  report_diagnostics(a, err);
  return a;
}

int guarded(const RunConfig& config, std::ostream& err,
            const std::function<int()>& body) {
  try {
    validate(config);
    return body();
  } catch (const EmptyCorpus& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
  if (config.backend == BackendKind::mock) {
    return std::make_unique<MockBackend>(config.mock_transform, config.mock_prefix);
  }
  HttpBackendConfig http;
  http.base_url = config.backend_url;
  http.model = config.model;
  http.api_key_env = config.api_key_env;
  http.retries = config.retries;
  http.timeout = std::chrono::seconds(config.timeout_seconds);
  http.max_in_flight = config.max_in_flight;
  http.rps_limit = config.rps_limit;
  return std::make_unique<HttpBackend>(std::move(http));
}

}  // namespace

void validate(const RunConfig& config) {
  if (config.window == 0) throw Error("window must be positive");
  if (config.reserved_output && *config.reserved_output >= config.window) {
    throw Error("reserved output must be smaller than the window");
  }
  if (config.backend == BackendKind::http &&
      (config.backend_url.empty() || config.model.empty())) {
    throw Error("http backend needs --backend-url and --model");
  }
  if (config.max_in_flight == 0) throw Error("max-in-flight must be positive");
}

std::vector<fs::path> discover_projects(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw NotADirectory(root.string());
  std::vector<fs::path> subdirs;
  bool is_project = false;
  for (const auto& entry : fs::directory_iterator(root)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory()) {
      if (name == "src") is_project = true;
      if (!name.starts_with(".")) subdirs.push_back(entry.path());
    } else if (entry.path().extension() == ".java" || name == "pom.xml" ||
               name == "build.gradle" || name == "build.gradle.kts" ||
               name == "build.xml") {
      is_project = true;
    }
  }
  if (is_project) return {root};
  std::sort(subdirs.begin(), subdirs.end());
  return subdirs;
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(config, err, [&] {
    const auto format = config.format.empty() ? "markdown" : config.format;
    ReportFormat rf;
    if (format == "json") {
      rf = ReportFormat::json;
    } else if (format == "csv") {
      rf = ReportFormat::csv;
    } else if (format == "markdown") {
      rf = ReportFormat::markdown;
    } else {
      throw Error("analyze cannot write format " + format);
    }

    Session session(config);
    std::vector<ProjectReport> rows;
    for (const auto& dir : discover_projects(config.corpus_root)) {
      try {
        auto a = analyze_files(project_name(dir),
                               scan_corpus(dir, config.include_tests.value_or(true)),
                               ContextBudget{config.window, 0, 0}, session.counter,
                               config.max_in_flight);
        report_diagnostics(a, err);
        rows.push_back(std::move(a.report));
      } catch (const EmptyCorpus& e) {
        err << "warning: skipping project: " << e.what() << "\n";
      }
    }
    if (rows.empty()) throw EmptyCorpus(config.corpus_root.string());
    emit(config, render_report(summarize(std::move(rows)), rf), out);
    session.finish(config, err);
    return 0;
  });
}

int cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(config, err, [&] {
    if (!config.format.empty() && config.format != "json") {
      throw Error("decompose writes json only");
    }
    Session session(config);
    const auto a = analyze_root(config, true, session, err);

    nlohmann::ordered_json doc;
    doc["project"] = a.report.project;
    doc["tokenizer_name"] = a.report.tokenizer_name;
    doc["tokenizer_hash"] = a.report.tokenizer_hash;
    auto files = nlohmann::ordered_json::array();
    for (const auto& pf : a.files) {
      files.push_back(nlohmann::ordered_json{
          {"path", pf.file.rel_path},
          {"role", pf.file.role == FileRole::test ? "test" : "source"},
          {"fragments", fragments_to_json(pf.fragments)},
      });
    }
    doc["files"] = std::move(files);
    auto diags = nlohmann::ordered_json::array();
    for (const auto& d : a.diagnostics) {
      diags.push_back(nlohmann::ordered_json{
          {"path", d.path}, {"offset", d.offset}, {"message", d.message}});
    }
    doc["diagnostics"] = std::move(diags);
    doc["skipped_files"] = a.report.skipped_files;
    emit(config, doc.dump(2) + "\n", out);
    session.finish(config, err);
    return 0;
  });
}

int cmd_graph(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(config, err, [&] {
    const auto format = config.format.empty() ? "dot" : config.format;
    if (format != "dot" && format != "json") {
      throw Error("graph cannot write format " + format);
    }
    Session session(config);
    const auto a = analyze_root(config, false, session, err);
    const auto graph = build_call_graph(a.files);
    const auto batches = condense(graph).batches();

    std::string text;
    if (format == "json") {
      auto doc = nlohmann::ordered_json::parse(export_graph(graph, GraphFormat::json));
      doc["batches"] = batches;
      text = doc.dump(2) + "\n";
    } else {
      text = export_graph(graph, GraphFormat::dot);
      for (std::size_t i = 0; i < batches.size(); ++i) {
        text += "// batch " + std::to_string(i + 1) + ":";
        for (const auto& id : batches[i]) text += " " + id;
        text += "\n";
      }
    }
    emit(config, text, out);
    session.finish(config, err);
    return 0;
  });
}

int cmd_translate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(config, err, [&] {
    Session session(config);
    const auto a = analyze_root(config, false, session, err);
    const TranslationUnits units(a.files);
    const auto graph = build_call_graph(a.files);
    const auto backend = make_backend(config);

    RunOptions options;
    options.pack.window = config.window;
    options.pack.reserved_output = config.reserved_output;
    if (config.template_path) {
      options.pack.prompt = PromptTemplate::load(*config.template_path);
    }
    options.fail_fast = config.fail_fast;
    options.max_in_flight = config.max_in_flight;

    std::vector<TranslationMode> modes{config.mode};
    if (config.compare) {
      modes = {TranslationMode::whole_file, TranslationMode::method_decomposition};
    }
    std::vector<RunSummary> summaries;
    for (const auto mode : modes) {
      const auto plan =
          mode == TranslationMode::whole_file
              ? make_whole_file_plan(a.files, config.source_lang, config.target_lang)
              : make_plan(condense(graph), config.source_lang, config.target_lang);
      const auto run =
          run_translation(plan, units, graph, *backend, options, session.counter);
      if (run.summary.budget_violations > 0) {
        err << "error: " << run.summary.budget_violations
            << " prompts exceeded the window\n";
      }
      if (config.output) {
        auto dir = *config.output;
        if (config.compare) dir /= std::string(to_string(mode));
        assemble_outputs(run, units, dir);
      }
      summaries.push_back(run.summary);
    }
    out << render_run_summaries(summaries);
    session.finish(config, err);
    for (const auto& s : summaries) {
      if (s.budget_violations > 0) return 1;
    }
    return 0;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Method-level decomposition, token metrics, call graphs and "
               "budgeted translation for Java projects",
               "fragkit"};
  app.set_config("--config", "", "Read options from a key=value file");
  app.require_subcommand(1);
  app.fallthrough();

  std::string mode = "method_decomposition";
  std::string backend = "mock";
  std::string transform = "identity";
  bool with_tests = false;
  bool without_tests = false;

  app.add_option("--window", config.window, "Context window in tokens")
      ->capture_default_str();
  app.add_option("--reserved-output", config.reserved_output,
                 "Tokens reserved for the reply (default: automatic)");
  app.add_option("--tokenizer", config.tokenizer_path,
                 "BPE merge table (default: lexeme fallback)");
  auto* with_flag = app.add_flag(
      "--include-tests", with_tests,
      "Include test files (default: yes for analyze/decompose, no otherwise)");
  app.add_flag("--no-include-tests", without_tests, "Exclude test files")
      ->excludes(with_flag);
  app.add_option("--mode", mode, "Translation mode")
      ->check(CLI::IsMember({"whole_file", "method_decomposition"}))
      ->capture_default_str();
  app.add_flag("--compare", config.compare, "Run both translation modes");
  app.add_option("--backend", backend, "Translation backend")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  app.add_option("--backend-url", config.backend_url,
                 "Chat-completions base URL, e.g. http://localhost:8000/v1");
  app.add_option("--model", config.model, "Model name sent to the backend");
  app.add_option("--api-key-env", config.api_key_env,
                 "Environment variable holding the API key")
      ->capture_default_str();
  app.add_option("--mock-transform", transform, "Mock backend transform")
      ->check(CLI::IsMember({"identity", "line_prefix"}))
      ->capture_default_str();
  app.add_option("--mock-prefix", config.mock_prefix, "Prefix for line_prefix");
  app.add_option("--template", config.template_path, "Prompt template file");
  app.add_option("--source-lang", config.source_lang)->capture_default_str();
  app.add_option("--target-lang", config.target_lang)->capture_default_str();
  app.add_option("--out", config.output,
                 "Output file (analyze, decompose, graph) or directory (translate)");
  app.add_option("--format", config.format, "json|csv|markdown or dot|json")
      ->check(CLI::IsMember({"json", "csv", "markdown", "dot"}));
  app.add_option("-j,--max-in-flight", config.max_in_flight,
                 "Worker threads and concurrent backend requests")
      ->capture_default_str();
  app.add_option("--rps-limit", config.rps_limit, "Backend requests per second (0: off)");
  app.add_option("--retries", config.retries)->capture_default_str();
  app.add_option("--timeout", config.timeout_seconds, "Backend timeout in seconds")
      ->capture_default_str();
  app.add_flag("--fail-fast", config.fail_fast, "Abort on the first backend error");
  app.add_option("--cache", config.cache_path, "Token-count cache file");
  app.add_flag("--verify-cache", config.verify_cache,
               "Recompute about 1% of cache hits and fail on mismatch");

  std::function<int()> action;
  auto add = [&](const char* name, const char* help,
                 int (*cmd)(const RunConfig&, std::ostream&, std::ostream&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("root", config.corpus_root, "Corpus root directory")->required();
    sub->callback([&, cmd] { action = [&, cmd] { return cmd(config, out, err); }; });
  };
  add("analyze", "Per-project token metrics table", cmd_analyze);
  add("decompose", "Method fragments per file as JSON", cmd_decompose);
  add("graph", "Call graph and bottom-up batch order", cmd_graph);
  add("translate", "Budgeted translation through a backend", cmd_translate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  if (with_tests) config.include_tests = true;
  if (without_tests) config.include_tests = false;
  config.mode = *parse_translation_mode(mode);
  config.backend = backend == "http" ? BackendKind::http : BackendKind::mock;
  config.mock_transform =
      transform == "line_prefix" ? MockTransform::line_prefix : MockTransform::identity;
  return action ? action() : 1;
}

}  // namespace fragkit
