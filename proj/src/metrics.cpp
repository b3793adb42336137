#include "fragkit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>

#include "fragkit/errors.hpp"
#include "fragkit/parallel.hpp"
#include "json.hpp"

namespace fragkit {
namespace {

struct FileOutcome {
  std::size_t file_tokens = 0;
  std::optional<Extraction> extraction;
  std::optional<Diagnostic> diagnostic;
};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string window_label(std::size_t window) {
  if (window % 1024 == 0) return std::to_string(window / 1024) + "K";
  return std::to_string(window);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string markdown_cell(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '|') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

ProjectAnalysis analyze_files(std::string project, std::vector<SourceFile> files,
                              const ContextBudget& budget,
                              const TokenCounter& counter, std::size_t jobs) {
  std::vector<FileOutcome> outcomes(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    auto& out = outcomes[i];
    const auto& file = files[i];
    out.file_tokens = counter.count(file.content);
    try {
      auto ex = extract_fragments(file);
      for (auto& f : ex.fragments) {
        f.token_count = counter.count(own_text(file.content, f));
      }
      out.extraction = std::move(ex);
    } catch (const UnbalancedBraces& e) {
      out.diagnostic = Diagnostic{file.rel_path, e.offset(), e.what()};
    }
  });

  ProjectAnalysis result;
  auto& r = result.report;
  r.project = std::move(project);
  r.window = budget.window;
  r.tokenizer_name = counter.name();
  r.tokenizer_hash = counter.hash();
  r.n_files = files.size();

  const ContextBudget raw{budget.window, 0, 0};
  std::size_t files_over = 0;
  std::size_t methods_over = 0;
  double token_sum = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto& out = outcomes[i];
    if (!fits(raw, out.file_tokens)) ++files_over;
    if (out.diagnostic) {
      result.diagnostics.push_back(*out.diagnostic);
      continue;
    }
    for (const auto& f : out.extraction->fragments) {
      ++r.n_methods;
      token_sum += static_cast<double>(*f.token_count);
      if (!fits(raw, *f.token_count)) ++methods_over;
    }
    result.files.push_back(ParsedFile{std::move(files[i]),
                                      std::move(out.extraction->fragments),
                                      std::move(out.extraction->skeleton)});
  }
  r.skipped_files = result.diagnostics.size();
  if (result.files.empty()) throw EmptyCorpus(r.project);

  r.pct_files_over = 100.0 * static_cast<double>(files_over) /
                     static_cast<double>(r.n_files);
  if (r.n_methods > 0) {
    const auto n = static_cast<double>(r.n_methods);
    r.avg_tokens_per_method = token_sum / n;
    r.pct_methods_over = 100.0 * static_cast<double>(methods_over) / n;
  }
  r.pct_context = r.avg_tokens_per_method * 100.0 / static_cast<double>(r.window);
  return result;
}

ProjectReport compute_project_report(const std::filesystem::path& project,
                                     const ContextBudget& budget,
                                     const TokenCounter& counter,
                                     bool include_tests, std::size_t jobs) {
  auto files = scan_corpus(project, include_tests);
  auto name = project.filename().string();
  if (name.empty()) name = project.parent_path().filename().string();
  return analyze_files(std::move(name), std::move(files), budget, counter, jobs)
      .report;
}

CorpusSummary summarize(std::vector<ProjectReport> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.project < b.project;
  });
  CorpusSummary s;
  s.rows = std::move(rows);
  if (s.rows.empty()) return s;
  auto& a = s.averages;
  for (const auto& r : s.rows) {
    a.n_files += static_cast<double>(r.n_files);
    a.skipped_files += static_cast<double>(r.skipped_files);
    a.pct_files_over += r.pct_files_over;
    a.n_methods += static_cast<double>(r.n_methods);
    a.avg_tokens_per_method += r.avg_tokens_per_method;
    a.pct_methods_over += r.pct_methods_over;
    a.pct_context += r.pct_context;
  }
  const auto n = static_cast<double>(s.rows.size());
  for (double* col : {&a.n_files, &a.skipped_files, &a.pct_files_over,
                      &a.n_methods, &a.avg_tokens_per_method,
                      &a.pct_methods_over, &a.pct_context}) {
    *col /= n;
  }
  return s;
}

double reduction_ratio(double before_pct, double after_pct) {
  if (before_pct == 0) throw DivisionByZero("reduction_ratio: before is 0");
  return (1.0 - after_pct / before_pct) * 100.0;
}

double improvement_factor(double before_pct_context, double after_pct_context) {
  if (after_pct_context == 0) throw DivisionByZero("improvement_factor: after is 0");
  return before_pct_context / after_pct_context;
}

std::string render_report(const CorpusSummary& summary, ReportFormat format) {
  switch (format) {
    case ReportFormat::json: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : summary.rows) {
        arr.push_back(nlohmann::ordered_json{
            {"project", r.project},
            {"n_files", r.n_files},
            {"skipped_files", r.skipped_files},
            {"pct_files_over", r.pct_files_over},
            {"n_methods", r.n_methods},
            {"avg_tokens_per_method", r.avg_tokens_per_method},
            {"pct_methods_over", r.pct_methods_over},
            {"pct_context", r.pct_context},
            {"window", r.window},
            {"tokenizer_name", r.tokenizer_name},
            {"tokenizer_hash", r.tokenizer_hash},
        });
      }
      return arr.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out =
          "project,n_files,skipped_files,pct_files_over,n_methods,"
          "avg_tokens_per_method,pct_methods_over,pct_context,window,"
          "tokenizer_name,tokenizer_hash\n";
      for (const auto& r : summary.rows) {
        out += csv_field(r.project) + "," + std::to_string(r.n_files) + "," +
               std::to_string(r.skipped_files) + "," +
               format_double(r.pct_files_over) + "," +
               std::to_string(r.n_methods) + "," +
               format_double(r.avg_tokens_per_method) + "," +
               format_double(r.pct_methods_over) + "," +
               format_double(r.pct_context) + "," + std::to_string(r.window) +
               "," + csv_field(r.tokenizer_name) + "," +
               csv_field(r.tokenizer_hash) + "\n";
      }
      return out;
    }
    case ReportFormat::markdown: {
      const std::size_t window =
          summary.rows.empty() ? 2048 : summary.rows.front().window;
      const auto k = window_label(window);
      std::string out = "| Project | % Files >" + k + " Tokens | # Methods | "
                        "Avg. Tokens / Method | % Methods >" + k +
                        " Tokens | % " + k + " Context |\n"
                        "|---|---:|---:|---:|---:|---:|\n";
      for (const auto& r : summary.rows) {
        out += "| " + markdown_cell(r.project) + " | " + fixed2(r.pct_files_over) +
               "% | " + std::to_string(r.n_methods) + " | " +
               fixed2(r.avg_tokens_per_method) + " | " +
               fixed2(r.pct_methods_over) + "% | " + fixed2(r.pct_context) +
               "% |\n";
      }
      if (!summary.rows.empty()) {
        const auto& a = summary.averages;
        out += "| Average | " + fixed2(a.pct_files_over) + "% | " +
               fixed2(a.n_methods) + " | " + fixed2(a.avg_tokens_per_method) +
               " | " + fixed2(a.pct_methods_over) + "% | " +
               fixed2(a.pct_context) + "% |\n";
      }
      return out;
    }
  }
  return {};
}

CorpusSummary parse_report_json(std::string_view text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<ProjectReport> rows;
  for (const auto& j : arr) {
    ProjectReport r;
    r.project = j.at("project").get<std::string>();
    r.n_files = j.at("n_files").get<std::size_t>();
    r.skipped_files = j.at("skipped_files").get<std::size_t>();
    r.pct_files_over = j.at("pct_files_over").get<double>();
    r.n_methods = j.at("n_methods").get<std::size_t>();
    r.avg_tokens_per_method = j.at("avg_tokens_per_method").get<double>();
    r.pct_methods_over = j.at("pct_methods_over").get<double>();
    r.pct_context = j.at("pct_context").get<double>();
    r.window = j.at("window").get<std::size_t>();
    r.tokenizer_name = j.at("tokenizer_name").get<std::string>();
    r.tokenizer_hash = j.at("tokenizer_hash").get<std::string>();
    rows.push_back(std::move(r));
  }
  return summarize(std::move(rows));
}

}  // namespace fragkit
