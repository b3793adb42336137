#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

namespace fragkit {

/// (tokenizer hash, content hash) -> token count, persisted as one text file:
///
///   fragkit-token-cache v1
///   <tokenizer-hash>\t<content-sha256>\t<count>
///
/// Safe for concurrent lookup/insert. save() writes a temp file and renames.
class TokenCountCache {
 public:
  TokenCountCache() = default;
  /// Loads entries from path if the file exists; a malformed file throws
  /// IoError.
  explicit TokenCountCache(std::filesystem::path path);

  std::optional<std::size_t> lookup(const std::string& tokenizer_hash,
                                    const std::string& content_hash) const;
  void insert(const std::string& tokenizer_hash,
              const std::string& content_hash, std::size_t count);

  std::size_t size() const;
  std::size_t hits() const;
  std::size_t verified() const;
  void note_verified();

  void save() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::size_t> entries_;
  mutable std::size_t hits_ = 0;
  std::size_t verified_ = 0;
};

}  // namespace fragkit
