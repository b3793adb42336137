#include "fragkit/tokenizer.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>
#include <tuple>

#include "fragkit/errors.hpp"
#include "fragkit/hash.hpp"
#include "fragkit/token_cache.hpp"

namespace fragkit {
namespace {

constexpr std::string_view kHeader = "bpe-merges v1 ";
constexpr std::string_view kFallbackName = "fallback-lexeme";
constexpr std::string_view kFallbackHash = "fallback-lexeme-w8-v1";

std::uint64_t pair_key(std::uint32_t left, std::uint32_t right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

bool is_plain(unsigned char c) { return c >= 0x21 && c <= 0x7E && c != '\\'; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string escape_symbol(std::string_view sym) {
  std::string out;
  for (const char ch : sym) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_plain(c)) {
      out.push_back(ch);
    } else {
      char buf[5];
      std::snprintf(buf, sizeof buf, "\\x%02X", c);
      out += buf;
    }
  }
  return out;
}

std::string unescape_symbol(std::string_view field, std::size_t line) {
  if (field.empty()) throw FormatError(line, "empty symbol");
  std::string out;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto c = static_cast<unsigned char>(field[i]);
    if (c == '\\') {
      if (i + 3 >= field.size()) throw FormatError(line, "truncated escape");
      const int hi = hex_value(field[i + 2]);
      const int lo = hex_value(field[i + 3]);
      if (field[i + 1] != 'x' || hi < 0 || lo < 0) {
        throw FormatError(line, "bad escape");
      }
      out.push_back(static_cast<char>(hi * 16 + lo));
      i += 3;
    } else if (is_plain(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      throw FormatError(line, "unescaped byte");
    }
  }
  return out;
}

}  // namespace

TokenModel::TokenModel(std::string name, std::vector<Merge> merges)
    : name_(std::move(name)), merges_(std::move(merges)) {
  std::unordered_map<std::string, std::uint32_t> ids;
  symbols_.reserve(256 + merges_.size());
  for (int b = 0; b < 256; ++b) {
    symbols_.emplace_back(1, static_cast<char>(b));
    ids.emplace(symbols_.back(), static_cast<std::uint32_t>(b));
  }
  for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
    const auto& [left, right] = merges_[rank];
    const auto l = ids.find(left);
    const auto r = ids.find(right);
    if (left.empty() || right.empty() || l == ids.end() || r == ids.end()) {
      throw FormatError(rank + 2, "merge operand is neither a byte nor an "
                                  "earlier merge result");
    }
    const std::string joined = left + right;
    auto [it, inserted] =
        ids.emplace(joined, static_cast<std::uint32_t>(symbols_.size()));
    if (inserted) symbols_.push_back(joined);
    // A repeated pair keeps its first (highest priority) rank.
    rules_.emplace(pair_key(l->second, r->second),
                   Rule{static_cast<std::uint32_t>(rank), it->second});
  }
  hash_ = sha256_hex(serialize_token_model(*this));
}

std::vector<std::uint32_t> TokenModel::run(std::string_view text) const {
  const std::size_t n = text.size();
  std::vector<std::uint32_t> sym(n);
  std::vector<std::ptrdiff_t> prev(n), next(n);
  for (std::size_t i = 0; i < n; ++i) {
    sym[i] = static_cast<unsigned char>(text[i]);
    prev[i] = static_cast<std::ptrdiff_t>(i) - 1;
    next[i] = i + 1 < n ? static_cast<std::ptrdiff_t>(i + 1) : -1;
  }

  // (rank, left position, left symbol, right symbol); equal ranks pop left
  // to right, and a merge only ever creates pairs of strictly higher rank,
  // so each rank is applied in one left-to-right, non-overlapping pass.
  using Entry = std::tuple<std::uint32_t, std::size_t, std::uint32_t, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto offer = [&](std::ptrdiff_t pos) {
    if (pos < 0 || next[pos] < 0) return;
    const auto it = rules_.find(pair_key(sym[pos], sym[next[pos]]));
    if (it != rules_.end()) {
      heap.emplace(it->second.rank, static_cast<std::size_t>(pos), sym[pos],
                   sym[next[pos]]);
    }
  };
  for (std::size_t i = 0; i + 1 < n; ++i) offer(static_cast<std::ptrdiff_t>(i));

  std::vector<bool> alive(n, true);
  while (!heap.empty()) {
    const auto [rank, pos, left, right] = heap.top();
    heap.pop();
    const auto q = next[pos];
    if (!alive[pos] || q < 0 || sym[pos] != left || sym[q] != right) continue;
    sym[pos] = rules_.at(pair_key(left, right)).result;
    alive[q] = false;
    next[pos] = next[q];
    if (next[q] >= 0) prev[next[q]] = static_cast<std::ptrdiff_t>(pos);
    offer(prev[pos]);
    offer(static_cast<std::ptrdiff_t>(pos));
  }

  std::vector<std::uint32_t> out;
  for (std::ptrdiff_t p = n ? 0 : -1; p >= 0; p = next[p]) out.push_back(sym[p]);
  return out;
}

std::vector<std::string> TokenModel::encode(std::string_view text) const {
  std::vector<std::string> out;
  for (const auto id : run(text)) out.push_back(symbols_[id]);
  return out;
}

std::size_t TokenModel::count(std::string_view text) const {
  return run(text).size();
}

TokenModel parse_token_model(std::string_view text) {
  if (text.empty()) throw EmptyModel("merge table file is empty");
  std::vector<TokenModel::Merge> merges;
  std::string name;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    if (last) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                          line.back() == '\r')) {
      throw FormatError(line_no, "trailing whitespace");
    }
    if (line_no == 1) {
      if (line.substr(0, kHeader.size()) != kHeader ||
          line.size() == kHeader.size()) {
        throw FormatError(1, "expected header 'bpe-merges v1 <name>'");
      }
      name = std::string(line.substr(kHeader.size()));
      continue;
    }
    const auto space = line.find(' ');
    if (space == std::string_view::npos ||
        line.find(' ', space + 1) != std::string_view::npos) {
      throw FormatError(line_no, "expected 'LEFT RIGHT'");
    }
    merges.emplace_back(unescape_symbol(line.substr(0, space), line_no),
                        unescape_symbol(line.substr(space + 1), line_no));
  }
  return TokenModel(std::move(name), std::move(merges));
}

TokenModel load_token_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open merge table");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_token_model(buf.str());
}

std::string serialize_token_model(const TokenModel& model) {
  std::string out(kHeader);
  out += model.name();
  out += '\n';
  for (const auto& [left, right] : model.merges()) {
    out += escape_symbol(left);
    out += ' ';
    out += escape_symbol(right);
    out += '\n';
  }
  return out;
}

std::size_t count_tokens(const TokenModel& model, std::string_view text) {
  return model.count(text);
}

std::size_t count_tokens_fallback(std::string_view text) {
  std::size_t tokens = 0;
  std::size_t run = 0;
  auto flush = [&] {
    tokens += (run + 7) / 8;
    run = 0;
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool ident = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       (c >= '0' && c <= '9') || c == '_' || c == '$';
    if (ident) {
      ++run;
      continue;
    }
    flush();
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                       c == '\f' || c == '\v';
    if (!space) ++tokens;
  }
  flush();
  return tokens;
}

bool fits(const ContextBudget& budget, std::size_t input_tokens) {
  return input_tokens + budget.prompt_overhead + budget.reserved_output <=
         budget.window;
}

TokenCounter::TokenCounter(std::shared_ptr<const TokenModel> model)
    : model_(std::move(model)) {}

std::size_t TokenCounter::count_uncached(std::string_view text) const {
  return model_ ? model_->count(text) : count_tokens_fallback(text);
}

std::size_t TokenCounter::count(std::string_view text) const {
  if (!cache_) return count_uncached(text);
  const std::string tok_hash = hash();
  const std::string key = sha256_hex(text);
  if (const auto hit = cache_->lookup(tok_hash, key)) {
    // ~1% of hits, chosen by content hash so the sample is reproducible.
    if (verify_ && std::stoul(key.substr(0, 4), nullptr, 16) < 655) {
      const std::size_t fresh = count_uncached(text);
      if (fresh != *hit) {
        throw CacheMismatch("token cache entry " + key + " holds " +
                            std::to_string(*hit) + ", recomputed " +
                            std::to_string(fresh));
      }
      cache_->note_verified();
    }
    return *hit;
  }
  const std::size_t fresh = count_uncached(text);
  cache_->insert(tok_hash, key, fresh);
  return fresh;
}

std::string TokenCounter::name() const {
  return model_ ? model_->name() : std::string(kFallbackName);
}

std::string TokenCounter::hash() const {
  return model_ ? model_->hash() : std::string(kFallbackHash);
}

void TokenCounter::set_cache(std::shared_ptr<TokenCountCache> cache,
                             bool verify) {
  cache_ = std::move(cache);
  verify_ = verify;
}

}  // namespace fragkit
