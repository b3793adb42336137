#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fragkit/callgraph.hpp"
#include "fragkit/source_model.hpp"
#include "fragkit/tokenizer.hpp"
#include "json.hpp"

namespace fragkit {

enum class TranslationMode { whole_file, method_decomposition };

std::string_view to_string(TranslationMode mode);
/// Accepts "whole_file" and "method_decomposition".
std::optional<TranslationMode> parse_translation_mode(std::string_view text);

struct TranslationPlan {
  TranslationMode mode = TranslationMode::method_decomposition;
  /// Fragment ids, or file rel_paths in whole_file mode.
  std::vector<std::vector<std::string>> batches;
  std::string source_lang = "Java";
  std::string target_lang = "Python";
};

TranslationPlan make_plan(const SccDag& dag, std::string source_lang = "Java",
                          std::string target_lang = "Python");
TranslationPlan make_whole_file_plan(std::span<const ParsedFile> files,
                                     std::string source_lang = "Java",
                                     std::string target_lang = "Python");

/// Plain text with {SOURCE_LANG}, {TARGET_LANG}, {CONTEXT}, {SOURCE} holes.
struct PromptTemplate {
  std::string text;

  static PromptTemplate default_template();
  static PromptTemplate load(const std::filesystem::path& path);

  /// Single pass; hole names inside substituted values are left alone.
  std::string render(std::string_view source_lang, std::string_view target_lang,
                     std::string_view context, std::string_view source) const;
};

enum class ContextRepresentation { translated_body, signature_only };

struct ContextEntry {
  std::string fragment_id;
  ContextRepresentation representation;
};

struct PromptPacket {
  std::vector<std::string> fragment_ids;
  std::string instruction_text;  // template with empty holes
  std::string source_text;
  std::vector<ContextEntry> dependency_context;
  std::string prompt_text;  // what the backend receives
  /// Count of the full prompt: instruction, context and source together.
  std::size_t total_input_tokens = 0;
  ContextBudget budget;  // prompt_overhead = count(instruction_text)
};

enum class TranslationStatus { translated, out_of_context, backend_error };

std::string_view to_string(TranslationStatus status);

struct TranslationResult {
  std::string id;  // fragment id, or rel_path in whole_file mode
  std::string file;
  TranslationStatus status = TranslationStatus::translated;
  std::string output_text;  // non-empty iff translated
  std::size_t input_tokens = 0;
  std::string detail;  // error message for failed inputs
};

struct RunSummary {
  TranslationMode mode = TranslationMode::method_decomposition;
  std::size_t n_source_files = 0;
  std::size_t n_inputs = 0;
  std::size_t n_out_of_context = 0;
  std::size_t n_backend_error = 0;
  double pct_context_occupied = 0;  // mean of input_tokens / window * 100
  std::size_t budget_violations = 0;
};

/// Lookup from fragment id (or file path) to the text that gets translated.
class TranslationUnits {
 public:
  explicit TranslationUnits(std::span<const ParsedFile> files);

  struct Unit {
    std::string id;
    std::string file;
    std::string source_text;  // nested fragments replaced by placeholders
    std::string signature_text;
    const MethodFragment* fragment = nullptr;  // null for whole files
  };

  const Unit& at(const std::string& id) const;
  bool contains(const std::string& id) const { return units_.count(id) != 0; }
  std::span<const ParsedFile> files() const { return files_; }

 private:
  std::span<const ParsedFile> files_;
  std::map<std::string, Unit> units_;
};

struct PackOptions {
  std::size_t window = 2048;
  /// Unset: min(window / 2, 2 * largest member source count).
  std::optional<std::size_t> reserved_output;
  PromptTemplate prompt = PromptTemplate::default_template();
  std::string source_lang = "Java";
  std::string target_lang = "Python";
};

std::size_t auto_reserved_output(std::size_t window, std::size_t largest_source);

/// Builds the prompt for one batch. Out-of-batch callees are offered as
/// context by descending call-site count then id, each as a translated body,
/// else as a signature, else left out. Throws OutOfContext when instruction
/// plus source alone do not fit, and std::logic_error when a callee has no
/// result yet.
PromptPacket pack_prompt(const std::vector<std::string>& batch,
                         const TranslationUnits& units,
                         const std::map<std::string, TranslationResult>& completed,
                         const CallGraph& graph, const PackOptions& options,
                         const TokenCounter& counter);

/// Marker line that opens each member of a multi-fragment batch.
std::string batch_marker(std::string_view fragment_id);
/// Splits a batch reply on member markers; nullopt if any marker is missing.
std::optional<std::map<std::string, std::string>> split_batch_output(
    std::string_view output, const std::vector<std::string>& members);

class Backend;

struct RunOptions {
  PackOptions pack;
  bool fail_fast = false;
  /// Whole-file inputs are independent and may run this many at a time.
  std::size_t max_in_flight = 1;
  std::function<void(const PromptPacket&)> on_packet;
};

struct TranslationRun {
  std::vector<TranslationResult> results;  // plan order, members sorted
  RunSummary summary;
};

/// Runs the batches in plan order. Backend errors mark the batch
/// backend_error unless fail_fast is set, in which case they propagate.
TranslationRun run_translation(const TranslationPlan& plan,
                               const TranslationUnits& units,
                               const CallGraph& graph, Backend& backend,
                               const RunOptions& options,
                               const TokenCounter& counter);

/// Substring present once in every stub written for an untranslated input.
inline constexpr std::string_view kStubMarker = "@fragkit-untranslated";

/// Writes one output per file plus manifest.json under target_dir and
/// returns the manifest. Throws IoError.
nlohmann::ordered_json assemble_outputs(const TranslationRun& run,
                                        const TranslationUnits& units,
                                        const std::filesystem::path& target_dir);

/// Output text for one file without touching the disk.
std::string assemble_file(const ParsedFile& file,
                          const std::map<std::string, const TranslationResult*>& by_id,
                          TranslationMode mode);

/// Markdown table in the column order of the comparison table.
std::string render_run_summaries(const std::vector<RunSummary>& rows);

}  // namespace fragkit
