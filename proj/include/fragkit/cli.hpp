#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fragkit/backend.hpp"
#include "fragkit/translate.hpp"

namespace fragkit {

enum class BackendKind { mock, http };

struct RunConfig {
  std::filesystem::path corpus_root;
  std::size_t window = 2048;
  std::optional<std::size_t> reserved_output;  // unset: automatic
  std::optional<std::filesystem::path> tokenizer_path;
  std::optional<bool> include_tests;  // unset: per-command default
  TranslationMode mode = TranslationMode::method_decomposition;
  bool compare = false;
  BackendKind backend = BackendKind::mock;
  std::string backend_url;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  MockTransform mock_transform = MockTransform::identity;
  std::string mock_prefix = "// t: ";
  std::optional<std::filesystem::path> template_path;
  std::string source_lang = "Java";
  std::string target_lang = "Python";
  std::optional<std::filesystem::path> output;
  std::string format;  // empty: per-command default
  std::size_t max_in_flight = 4;
  double rps_limit = 0;
  std::size_t retries = 3;
  std::size_t timeout_seconds = 120;
  bool fail_fast = false;
  std::optional<std::filesystem::path> cache_path;
  bool verify_cache = false;
};

/// Throws Error when the config is inconsistent.
void validate(const RunConfig& config);

/// The root itself when it looks like a project (direct .java files, a src
/// directory, or a build file), else each immediate subdirectory, sorted.
std::vector<std::filesystem::path> discover_projects(const std::filesystem::path& root);

// Exit codes: 0 success, 1 error, 2 nothing to analyze.
int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_graph(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_translate(const RunConfig& config, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fragkit
