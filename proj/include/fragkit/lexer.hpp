#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace fragkit {

/// Half-open byte range [begin, end).
struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(const ByteRange& other) const {
    return begin <= other.begin && other.end <= end;
  }
  bool contains(std::size_t offset) const {
    return begin <= offset && offset < end;
  }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

enum class TokenKind {
  identifier,  // includes keywords; see is_java_keyword
  number,
  string,      // "..." and """text blocks"""
  character,
  punct,       // single byte, or one of "...", "::", "->"
  line_comment,
  block_comment,
  doc_comment,  // /** ... */
};

struct Token {
  TokenKind kind;
  ByteRange range;
};

/// Lexes Java-like source. Comments and literals are single opaque tokens, so
/// braces inside them never show up as punctuation. Unterminated string and
/// char literals end at the newline; an unterminated block comment runs to
/// the end of input. Never fails.
std::vector<Token> lex(std::string_view source);

bool is_comment(TokenKind kind);
bool is_java_keyword(std::string_view word);

/// View over the non-comment tokens of a lexed file.
class CodeTokens {
 public:
  CodeTokens(std::string_view source, const std::vector<Token>& all);

  std::size_t size() const { return code_.size(); }
  const Token& operator[](std::size_t i) const { return all_[code_[i]]; }
  std::string_view text(std::size_t i) const;
  bool is(std::size_t i, std::string_view punct_or_word) const;
  bool is_ident(std::size_t i) const;  // identifier that is not a keyword
  /// Position of code token i in the full token list (comments included).
  std::size_t full_index(std::size_t i) const { return code_[i]; }

  /// Index of the matching closer for an opening (, [ or {; nullopt if the
  /// file ends first.
  std::optional<std::size_t> match_forward(std::size_t open) const;
  /// Index of the opening ( for the ) at `close`.
  std::optional<std::size_t> match_backward(std::size_t close) const;
  /// If a balanced type-argument list starts at `lt`, the index one past its
  /// closing '>'. Only type-ish tokens are allowed between the brackets;
  /// otherwise '<' is an operator and nullopt is returned.
  std::optional<std::size_t> skip_type_args(std::size_t lt,
                                            std::size_t limit) const;

 private:
  std::string_view source_;
  const std::vector<Token>& all_;
  std::vector<std::size_t> code_;
};

}  // namespace fragkit
