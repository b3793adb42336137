#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fragkit/source_model.hpp"
#include "fragkit/tokenizer.hpp"

namespace fragkit {

/// One row of the decomposition table for a project.
struct ProjectReport {
  std::string project;
  std::size_t n_files = 0;
  std::size_t skipped_files = 0;
  double pct_files_over = 0;  // whole files with more tokens than the window
  std::size_t n_methods = 0;
  double avg_tokens_per_method = 0;  // 0 when n_methods == 0
  double pct_methods_over = 0;
  double pct_context = 0;  // avg_tokens_per_method / window * 100
  std::size_t window = 2048;
  std::string tokenizer_name;
  std::string tokenizer_hash;

  bool operator==(const ProjectReport&) const = default;
};

struct ColumnAverages {
  double n_files = 0;
  double skipped_files = 0;
  double pct_files_over = 0;
  double n_methods = 0;
  double avg_tokens_per_method = 0;
  double pct_methods_over = 0;
  double pct_context = 0;
};

/// Rows sorted by project name; averages are unweighted column means.
struct CorpusSummary {
  std::vector<ProjectReport> rows;
  ColumnAverages averages;
};

CorpusSummary summarize(std::vector<ProjectReport> rows);

struct Diagnostic {
  std::string path;
  std::size_t offset = 0;
  std::string message;
};

/// Decomposed project: every parsable file with token counts filled in.
struct ProjectAnalysis {
  ProjectReport report;
  std::vector<ParsedFile> files;
  std::vector<Diagnostic> diagnostics;  // one per skipped file
};

/// Tokenizes and decomposes the given files (on up to `jobs` threads) and
/// fills the report. Files that fail to parse still count toward the file
/// statistics. Throws EmptyCorpus when no file parses.
ProjectAnalysis analyze_files(std::string project, std::vector<SourceFile> files,
                              const ContextBudget& budget,
                              const TokenCounter& counter, std::size_t jobs = 1);

/// Scans the project directory and analyzes it; the project name is the
/// directory name.
ProjectReport compute_project_report(const std::filesystem::path& project,
                                     const ContextBudget& budget,
                                     const TokenCounter& counter,
                                     bool include_tests, std::size_t jobs = 1);

/// (1 - after/before) * 100. Throws DivisionByZero when before == 0.
double reduction_ratio(double before_pct, double after_pct);
/// before / after. Throws DivisionByZero when after == 0.
double improvement_factor(double before_pct_context, double after_pct_context);

enum class ReportFormat { json, csv, markdown };

std::string render_report(const CorpusSummary& summary, ReportFormat format);
/// Reads rows back from the JSON rendering.
CorpusSummary parse_report_json(std::string_view text);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

}  // namespace fragkit
