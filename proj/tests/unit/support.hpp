#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fragkit/callgraph.hpp"
#include "fragkit/tokenizer.hpp"

namespace testsupport {

std::filesystem::path fixtures_dir();
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Syntactically plausible Java with balanced braces: nested, local and
/// anonymous classes, enums with bodies, lambdas, initializer blocks, and
/// braces hidden in strings, text blocks, chars and comments.
std::string random_java_file(std::mt19937_64& rng);

/// Inserts brace-laden literals and comments at the start of each body.
std::string add_brace_noise(std::string_view content,
                            const std::vector<std::size_t>& body_begins);

/// Identifier runs cost ceil(len/8), other non-blank bytes 1; std::regex based.
std::size_t regex_fallback_count(const std::string& text);

/// Random merge list over a small alphabet; every operand is a byte or an
/// earlier result.
std::vector<fragkit::TokenModel::Merge> random_merges(std::mt19937_64& rng,
                                                      std::string_view alphabet,
                                                      std::size_t count);
std::string random_text(std::mt19937_64& rng, std::string_view alphabet,
                        std::size_t max_len);
/// Applies the lowest-ranked adjacent pair, leftmost first, one merge per step.
std::vector<std::string> brute_force_bpe(
    const std::vector<fragkit::TokenModel::Merge>& merges, std::string_view text);

fragkit::CallGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes);
/// Components as classes of mutual reachability (Floyd-Warshall closure).
std::set<std::set<std::string>> reachability_components(const fragkit::CallGraph& g);
std::set<std::set<std::string>> as_sets(const fragkit::SccDag& dag);
/// Every cross-component edge points to a component earlier in the order.
bool bottom_up(const fragkit::CallGraph& g, const fragkit::SccDag& dag);

struct PublishedRow {
  const char* project;
  double pct_files_over;
  std::size_t n_methods;
  double avg_tokens_per_method;
  double pct_methods_over;
  double pct_context;
};
/// The 20 published rows of the decomposition table.
const std::vector<PublishedRow>& published_rows();

}  // namespace testsupport
