#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fragkit/lexer.hpp"
#include "json.hpp"

namespace fragkit {

enum class FileRole { source, test };

struct SourceFile {
  std::filesystem::path path;  // as found on disk
  std::string rel_path;        // '/'-separated, relative to the scan root
  std::string content;         // raw bytes, never re-encoded
  FileRole role = FileRole::source;
};

/// `test` iff some segment of the relative path is "test" or "tests".
FileRole classify_role(std::string_view rel_path);

SourceFile load_source_file(const std::filesystem::path& path,
                            std::string rel_path);
void save_source_file(const SourceFile& file, const std::filesystem::path& path);

/// All regular `.java` files under root, sorted by relative path. Throws
/// NotADirectory, or IoError naming the first file that cannot be read.
std::vector<SourceFile> scan_corpus(const std::filesystem::path& root,
                                    bool include_tests);

enum class FragmentKind { method, constructor };

std::string_view to_string(FragmentKind kind);

/// One method or constructor with a body, located by exact byte spans.
struct MethodFragment {
  std::string id;     // rel_path#Owner.Chain.name/arity[@ordinal]
  std::string owner;  // nested type chain, e.g. "Outer.Inner" or "Outer.$1"
  std::string name;
  std::size_t arity = 0;
  FragmentKind kind = FragmentKind::method;
  bool varargs = false;
  std::string signature_text;  // declaration without doc, up to the body
  std::optional<ByteRange> doc_span;
  ByteRange body_span;  // '{' .. '}' inclusive
  ByteRange full_span;  // doc (or first modifier) .. '}' inclusive
  std::optional<std::size_t> token_count;
  /// Full spans of fragments lexically nested directly inside this one.
  std::vector<ByteRange> nested;
  /// Simple name of the owner's declared superclass, when known.
  std::string owner_super;

  bool operator==(const MethodFragment&) const = default;
};

/// A literal byte run, or a reference to a fragment whose own bytes are
/// described by `children` (literals plus any nested fragment references).
struct SkeletonSegment {
  std::string literal;
  std::string fragment_id;
  std::vector<SkeletonSegment> children;

  bool is_fragment() const { return !fragment_id.empty(); }
};

struct FileSkeleton {
  std::string file;
  std::vector<SkeletonSegment> segments;
};

struct Extraction {
  std::vector<MethodFragment> fragments;  // sorted by full_span.begin
  FileSkeleton skeleton;
};

/// Decomposes a file into method fragments. Pure function of the file bytes.
/// Throws UnbalancedBraces when the brace structure does not close.
Extraction extract_fragments(const SourceFile& file);

/// Rebuilds the file, substituting each referenced fragment's bytes. An empty
/// map reproduces the original file. Throws UnknownFragmentId.
std::string splice(const FileSkeleton& skeleton,
                   const std::map<std::string, std::string>& replacements);

std::string_view fragment_text(std::string_view content,
                               const MethodFragment& fragment);

/// Fragment bytes with nested fragments cut out; what token accounting sees.
std::string own_text(std::string_view content, const MethodFragment& fragment);

/// Fragment bytes where each directly nested fragment is replaced by a
/// single placeholder line `/*@fragment <id>*/`.
std::string text_with_placeholders(std::string_view content,
                                   const MethodFragment& fragment,
                                   const std::vector<MethodFragment>& all);

std::string placeholder_for(std::string_view fragment_id);

nlohmann::json fragments_to_json(const std::vector<MethodFragment>& fragments);

/// A file together with its decomposition; the unit later stages consume.
struct ParsedFile {
  SourceFile file;
  std::vector<MethodFragment> fragments;
  FileSkeleton skeleton;
};

}  // namespace fragkit
