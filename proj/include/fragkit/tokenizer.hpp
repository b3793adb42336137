#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fragkit {

/// Byte-level BPE merge table. All 256 byte values are base symbols; merge
/// rank is the position in the list (lower rank merges first).
class TokenModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  /// Validates that every merge operand is a single byte or the result of an
  /// earlier merge; throws FormatError(line) where line = index + 2 (the
  /// merge's line in the file format) otherwise.
  TokenModel(std::string name, std::vector<Merge> merges);

  const std::string& name() const { return name_; }
  const std::vector<Merge>& merges() const { return merges_; }
  std::size_t vocab_size() const { return symbols_.size(); }

  /// Final symbols after whole-text BPE.
  std::vector<std::string> encode(std::string_view text) const;
  std::size_t count(std::string_view text) const;

  /// SHA-256 of the canonical serialized form.
  const std::string& hash() const { return hash_; }

 private:
  struct Rule {
    std::uint32_t rank;
    std::uint32_t result;
  };
  std::vector<std::uint32_t> run(std::string_view text) const;

  std::string name_;
  std::vector<Merge> merges_;
  std::vector<std::string> symbols_;  // id -> bytes; ids 0..255 are bytes
  std::unordered_map<std::uint64_t, Rule> rules_;
  std::string hash_;
};

/// Parses the `bpe-merges v1 <name>` text format. Throws FormatError(line)
/// or EmptyModel (zero-byte file).
TokenModel parse_token_model(std::string_view text);
TokenModel load_token_model(const std::filesystem::path& path);
/// Canonical form: LF endings, `\xNN` for bytes outside 0x21..0x7E and for
/// backslash, trailing newline.
std::string serialize_token_model(const TokenModel& model);

std::size_t count_tokens(const TokenModel& model, std::string_view text);

/// Lexeme approximation used when no merge table is supplied: identifier
/// runs [A-Za-z0-9_$] cost ceil(len/8), other non-whitespace bytes cost 1.
std::size_t count_tokens_fallback(std::string_view text);

struct ContextBudget {
  std::size_t window = 2048;
  std::size_t reserved_output = 0;
  std::size_t prompt_overhead = 0;
};

/// input + overhead + reserved <= window (boundary inclusive).
bool fits(const ContextBudget& budget, std::size_t input_tokens);

class TokenCountCache;

/// The active token model (or the fallback), optionally memoized through a
/// shared on-disk cache. Copies share the model and the cache.
class TokenCounter {
 public:
  TokenCounter() = default;  // fallback
  explicit TokenCounter(std::shared_ptr<const TokenModel> model);

  std::size_t count(std::string_view text) const;
  std::size_t count_uncached(std::string_view text) const;

  std::string name() const;
  std::string hash() const;
  bool uses_fallback() const { return model_ == nullptr; }

  /// With verify set, about 1% of cache hits are recomputed and a mismatch
  /// throws CacheMismatch.
  void set_cache(std::shared_ptr<TokenCountCache> cache, bool verify = false);

 private:
  std::shared_ptr<const TokenModel> model_;
  std::shared_ptr<TokenCountCache> cache_;
  bool verify_ = false;
};

}  // namespace fragkit
