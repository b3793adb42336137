#include "fragkit/lexer.hpp"

#include <algorithm>
#include <iterator>
#include <string_view>

namespace fragkit {
namespace {

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Scans a quoted literal starting at `i` (the opening quote). Stops after the
// closing quote, or before a newline when unterminated.
std::size_t scan_quoted(std::string_view s, std::size_t i, char quote) {
  ++i;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\\') {
      i += 2;
      continue;
    }
    if (c == quote) return i + 1;
    if (c == '\n') return i;
    ++i;
  }
  return s.size();
}

std::size_t scan_text_block(std::string_view s, std::size_t i) {
  i += 3;
  while (i < s.size()) {
    if (s[i] == '\\') {
      i += 2;
      continue;
    }
    if (s.compare(i, 3, "\"\"\"") == 0) return i + 3;
    ++i;
  }
  return s.size();
}

constexpr std::string_view kKeywords[] = {
    "abstract", "assert",     "boolean",   "break",      "byte",
    "case",     "catch",      "char",      "class",      "const",
    "continue", "default",    "do",        "double",     "else",
    "enum",     "extends",    "false",     "final",      "finally",
    "float",    "for",        "goto",      "if",         "implements",
    "import",   "instanceof", "int",       "interface",  "long",
    "native",   "new",        "null",      "package",    "private",
    "protected", "public",    "return",    "short",      "static",
    "strictfp", "super",      "switch",    "synchronized", "this",
    "throw",    "throws",     "transient", "true",       "try",
    "void",     "volatile",   "while"};

}  // namespace

bool is_comment(TokenKind kind) {
  return kind == TokenKind::line_comment || kind == TokenKind::block_comment ||
         kind == TokenKind::doc_comment;
}

bool is_java_keyword(std::string_view word) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), word) !=
         std::end(kKeywords);
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    out.push_back(Token{kind, ByteRange{begin, end}});
  };
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '/' && i + 1 < n && s[i + 1] == '/') {
      i = s.find('\n', i);
      if (i == std::string_view::npos) i = n;
      push(TokenKind::line_comment, start, i);
      continue;
    }
    if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      const auto close = s.find("*/", i + 2);
      i = close == std::string_view::npos ? n : close + 2;
      // "/**/" is an empty plain comment, not a doc comment.
      const bool doc = start + 2 < n && s[start + 2] == '*' &&
                       !(start + 3 < n && s[start + 3] == '/');
      push(doc ? TokenKind::doc_comment : TokenKind::block_comment, start, i);
      continue;
    }
    if (c == '"') {
      i = s.compare(i, 3, "\"\"\"") == 0 ? scan_text_block(s, i)
                                         : scan_quoted(s, i, '"');
      push(TokenKind::string, start, std::min(i, n));
      i = std::min(i, n);
      continue;
    }
    if (c == '\'') {
      i = std::min(scan_quoted(s, i, '\''), n);
      push(TokenKind::character, start, i);
      continue;
    }
    if (is_ident_start(c)) {
      while (i < n && is_ident_part(static_cast<unsigned char>(s[i]))) ++i;
      push(TokenKind::identifier, start, i);
      continue;
    }
    if (is_digit(c) ||
        (c == '.' && i + 1 < n && is_digit(static_cast<unsigned char>(s[i + 1])))) {
      ++i;
      while (i < n) {
        const auto d = static_cast<unsigned char>(s[i]);
        if (is_ident_part(d) || d == '.') {
          ++i;
        } else if ((d == '+' || d == '-') &&
                   (s[i - 1] == 'e' || s[i - 1] == 'E' || s[i - 1] == 'p' ||
                    s[i - 1] == 'P')) {
          ++i;
        } else {
          break;
        }
      }
      push(TokenKind::number, start, i);
      continue;
    }
    if (s.compare(i, 3, "...") == 0) {
      i += 3;
    } else if (s.compare(i, 2, "::") == 0 || s.compare(i, 2, "->") == 0) {
      i += 2;
    } else {
      ++i;
    }
    push(TokenKind::punct, start, i);
  }
  return out;
}

CodeTokens::CodeTokens(std::string_view source, const std::vector<Token>& all)
    : source_(source), all_(all) {
  code_.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!is_comment(all[i].kind)) code_.push_back(i);
  }
}

std::string_view CodeTokens::text(std::size_t i) const {
  const auto& r = (*this)[i].range;
  return source_.substr(r.begin, r.size());
}

bool CodeTokens::is(std::size_t i, std::string_view word) const {
  if (i >= code_.size()) return false;
  const auto kind = (*this)[i].kind;
  return (kind == TokenKind::punct || kind == TokenKind::identifier) &&
         text(i) == word;
}

bool CodeTokens::is_ident(std::size_t i) const {
  return i < code_.size() && (*this)[i].kind == TokenKind::identifier &&
         !is_java_keyword(text(i));
}

std::optional<std::size_t> CodeTokens::match_forward(std::size_t open) const {
  std::vector<char> stack;
  for (std::size_t i = open; i < code_.size(); ++i) {
    if ((*this)[i].kind != TokenKind::punct) continue;
    const auto t = text(i);
    if (t == "(" || t == "[" || t == "{") {
      stack.push_back(t[0]);
    } else if (t == ")" || t == "]" || t == "}") {
      if (stack.empty()) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> CodeTokens::match_backward(std::size_t close) const {
  int depth = 0;
  for (std::size_t i = close + 1; i-- > 0;) {
    if ((*this)[i].kind != TokenKind::punct) continue;
    const auto t = text(i);
    if (t == ")" || t == "]" || t == "}") {
      ++depth;
    } else if (t == "(" || t == "[" || t == "{") {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> CodeTokens::skip_type_args(std::size_t lt,
                                                      std::size_t limit) const {
  if (!is(lt, "<")) return std::nullopt;
  int depth = 0;
  for (std::size_t i = lt; i < std::min(limit, code_.size()); ++i) {
    const auto& tok = (*this)[i];
    const auto t = text(i);
    if (tok.kind == TokenKind::identifier) {
      continue;  // type names, extends, super, primitives
    }
    if (tok.kind != TokenKind::punct) return std::nullopt;
    if (t == "<") {
      ++depth;
    } else if (t == ">") {
      if (--depth == 0) return i + 1;
    } else if (t == "&" && is(i + 1, "&") &&
               (*this)[i + 1].range.begin == tok.range.end) {
      return std::nullopt;  // &&
    } else if (t != "," && t != "." && t != "?" && t != "[" && t != "]" &&
               t != "&" && t != "@") {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace fragkit
