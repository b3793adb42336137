#include "fragkit/token_cache.hpp"

#include <fstream>
#include <sstream>

#include "fragkit/errors.hpp"

namespace fragkit {

namespace {
constexpr std::string_view kCacheHeader = "fragkit-token-cache v1";
}

TokenCountCache::TokenCountCache(std::filesystem::path path)
    : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // a missing cache file starts empty
  std::string line;
  if (!std::getline(in, line) || line != kCacheHeader) {
    throw IoError(path_.string(), "not a token cache file");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tok_hash, content_hash;
    std::size_t count = 0;
    if (!std::getline(fields, tok_hash, '\t') ||
        !std::getline(fields, content_hash, '\t') || !(fields >> count)) {
      throw IoError(path_.string(),
                    "malformed cache entry on line " + std::to_string(line_no));
    }
    entries_[{tok_hash, content_hash}] = count;
  }
}

std::optional<std::size_t> TokenCountCache::lookup(
    const std::string& tokenizer_hash, const std::string& content_hash) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find({tokenizer_hash, content_hash});
  if (it == entries_.end()) return std::nullopt;
  ++hits_;
  return it->second;
}

void TokenCountCache::insert(const std::string& tokenizer_hash,
                             const std::string& content_hash,
                             std::size_t count) {
  std::lock_guard lock(mu_);
  entries_[{tokenizer_hash, content_hash}] = count;
}

std::size_t TokenCountCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::size_t TokenCountCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t TokenCountCache::verified() const {
  std::lock_guard lock(mu_);
  return verified_;
}

void TokenCountCache::note_verified() {
  std::lock_guard lock(mu_);
  ++verified_;
}

void TokenCountCache::save() const {
  if (path_.empty()) return;
  std::ostringstream body;
  body << kCacheHeader << '\n';
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, count] : entries_) {
      body << key.first << '\t' << key.second << '\t' << count << '\n';
    }
  }
  auto tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot write cache");
    const auto data = body.str();
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError(tmp.string(), "cache write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw IoError(path_.string(), ec.message());
}

}  // namespace fragkit
