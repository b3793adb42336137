#include "fragkit/source_model.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <variant>

#include "fragkit/errors.hpp"

namespace fragkit {
namespace {

constexpr std::string_view kModifiers[] = {
    "public",   "protected",    "private", "static",   "final",
    "abstract", "synchronized", "native",  "strictfp", "default",
    "transient", "volatile",    "sealed"};

// Keywords that may legitimately appear in a return type.
constexpr std::string_view kTypeKeywords[] = {
    "boolean", "byte",  "char", "short", "int",     "long",
    "float",   "double", "void", "extends", "super"};

template <std::size_t N>
bool one_of(std::string_view word, const std::string_view (&list)[N]) {
  return std::find(std::begin(list), std::end(list), word) != std::end(list);
}

enum class FrameKind { file, type_body, method_body, block };

struct Frame {
  FrameKind kind = FrameKind::file;
  std::size_t open_tok = 0;
  int paren_depth = 0;
  std::size_t decl_start = 0;  // first token of the current member/statement
  std::string owner;           // type chain (type_body only)
  std::string super_name;
  bool is_enum = false;
  bool enum_constants_done = false;
  int anon_count = 0;
  std::optional<std::size_t> fragment;  // method_body only
};

struct TypeDecl {
  std::string name;
  bool is_enum = false;
  std::string super_name;
};

struct MethodDecl {
  std::size_t first_tok = 0;
  std::size_t name_tok = 0;
  std::size_t arity = 0;
  bool constructor = false;
  bool varargs = false;
};

using Decl = std::variant<std::monostate, TypeDecl, MethodDecl>;

struct Draft {
  MethodFragment fragment;
  std::optional<std::size_t> parent;
};

// Skips annotations and modifiers starting at j.
std::size_t skip_prefix(const CodeTokens& t, std::size_t j, std::size_t end) {
  while (j < end) {
    if (t.is(j, "@") && !t.is(j + 1, "interface")) {
      ++j;
      if (j >= end || t[j].kind != TokenKind::identifier) return j;
      ++j;
      while (j + 1 < end && t.is(j, ".") &&
             t[j + 1].kind == TokenKind::identifier) {
        j += 2;
      }
      if (j < end && t.is(j, "(")) {
        const auto close = t.match_forward(j);
        if (!close || *close >= end) return end;
        j = *close + 1;
      }
      continue;
    }
    if (t[j].kind == TokenKind::identifier && one_of(t.text(j), kModifiers)) {
      ++j;
      continue;
    }
    if (t.text(j) == "non" && t.is(j + 1, "-") && t.text(j + 2) == "sealed") {
      j += 3;
      continue;
    }
    break;
  }
  return j;
}

std::string superclass_after(const CodeTokens& t, std::size_t j,
                             std::size_t end) {
  for (; j < end; ++j) {
    if (t.is(j, "<")) {
      if (auto past = t.skip_type_args(j, end)) {
        j = *past - 1;
        continue;
      }
    }
    if (t.is(j, "extends") && t.is_ident(j + 1)) {
      std::size_t k = j + 1;
      while (k + 2 < end && t.is(k + 1, ".") && t.is_ident(k + 2)) k += 2;
      return std::string(t.text(k));
    }
  }
  return {};
}

bool is_type_token(const CodeTokens& t, std::size_t k) {
  const auto& tok = t[k];
  const auto text = t.text(k);
  if (tok.kind == TokenKind::identifier) {
    return !is_java_keyword(text) || one_of(text, kTypeKeywords);
  }
  if (tok.kind != TokenKind::punct) return false;
  return text == "." || text == "<" || text == ">" || text == "," ||
         text == "?" || text == "[" || text == "]" || text == "&" ||
         text == "@";
}

// Commas at nesting depth zero between open and close (exclusive). Angle
// brackets always nest in parameter lists.
std::size_t count_params(const CodeTokens& t, std::size_t open,
                         std::size_t close, bool* varargs) {
  if (close == open + 1) return 0;
  int depth = 0;
  std::size_t commas = 0;
  bool last_has_ellipsis = false;
  for (std::size_t k = open + 1; k < close; ++k) {
    if (t[k].kind != TokenKind::punct) continue;
    const auto s = t.text(k);
    if (s == "(" || s == "[" || s == "{" || s == "<") {
      ++depth;
    } else if (s == ")" || s == "]" || s == "}" || s == ">") {
      --depth;
    } else if (s == "," && depth == 0) {
      ++commas;
      last_has_ellipsis = false;
    } else if (s == "..." && depth == 0) {
      last_has_ellipsis = true;
    }
  }
  *varargs = last_has_ellipsis;
  return commas + 1;
}

// Classifies the declaration tokens [begin, end) that precede a '{' at end.
Decl analyze_decl(const CodeTokens& t, std::size_t begin, std::size_t end) {
  if (begin >= end) return std::monostate{};
  std::size_t j = skip_prefix(t, begin, end);
  if (j >= end) return std::monostate{};

  const auto head = t.text(j);
  if (t[j].kind == TokenKind::identifier &&
      (head == "class" || head == "interface" || head == "enum") &&
      t.is_ident(j + 1)) {
    return TypeDecl{std::string(t.text(j + 1)), head == "enum",
                    head == "class" ? superclass_after(t, j + 2, end) : ""};
  }
  if (t.is(j, "@") && t.is(j + 1, "interface") && t.is_ident(j + 2)) {
    return TypeDecl{std::string(t.text(j + 2)), false, ""};
  }
  if (head == "record" && t.is_ident(j + 1) &&
      (t.is(j + 2, "(") || t.is(j + 2, "<"))) {
    return TypeDecl{std::string(t.text(j + 1)), false, ""};
  }

  if (t.is(j, "<")) {
    const auto past = t.skip_type_args(j, end);
    if (!past) return std::monostate{};
    j = *past;
  }
  std::size_t k = j;
  while (k < end && !t.is(k, "(")) {
    if (!is_type_token(t, k)) return std::monostate{};
    ++k;
  }
  if (k >= end || k == j || !t.is_ident(k - 1)) return std::monostate{};
  const auto close = t.match_forward(k);
  if (!close || *close >= end || !t.is(*close, ")")) return std::monostate{};

  std::size_t p = *close + 1;
  while (t.is(p, "[") && t.is(p + 1, "]")) p += 2;
  if (p < end && t.is(p, "throws")) {
    ++p;
    while (p < end && is_type_token(t, p)) ++p;
  }
  if (p != end) return std::monostate{};

  MethodDecl decl;
  decl.first_tok = begin;
  decl.name_tok = k - 1;
  decl.constructor = (k - 1 == j);
  decl.arity = count_params(t, k, *close, &decl.varargs);
  return decl;
}

// If the '{' at i opens an anonymous class body (`new Base<..>(...) {`),
// returns the base type's simple name.
std::optional<std::string> anonymous_class_base(const CodeTokens& t,
                                                std::size_t i) {
  if (i == 0 || !t.is(i - 1, ")")) return std::nullopt;
  const auto open = t.match_backward(i - 1);
  if (!open || *open == 0) return std::nullopt;
  std::size_t k = *open - 1;
  if (t.is(k, ">")) {
    int depth = 0;
    while (true) {
      if (t.is(k, ">")) ++depth;
      if (t.is(k, "<") && --depth == 0) break;
      if (!is_type_token(t, k) || k == 0) return std::nullopt;
      --k;
    }
    if (k == 0) return std::nullopt;
    --k;
  }
  if (t[k].kind != TokenKind::identifier || is_java_keyword(t.text(k))) {
    return std::nullopt;
  }
  const std::string base(t.text(k));
  while (k >= 2 && t.is(k - 1, ".") && t[k - 2].kind == TokenKind::identifier &&
         !t.is(k - 2, "new")) {
    k -= 2;
  }
  if (k >= 1 && t.is(k - 1, "new")) return base;
  return std::nullopt;
}

bool starts_line(std::string_view src, std::size_t offset) {
  while (offset > 0) {
    const char c = src[offset - 1];
    if (c == '\n') return true;
    if (c != ' ' && c != '\t' && c != '\r' && c != '\f') return false;
    --offset;
  }
  return true;
}

// Leading run of `/** */` or `//` comments directly above the token at
// code index `first`, with no blank line anywhere in the run.
std::optional<ByteRange> find_doc(std::string_view src,
                                  const std::vector<Token>& all,
                                  const CodeTokens& t, std::size_t first) {
  const std::size_t fi = t.full_index(first);
  std::size_t cursor = t[first].range.begin;
  std::optional<ByteRange> doc;
  for (std::size_t k = fi; k-- > 0;) {
    const Token& c = all[k];
    if (c.kind != TokenKind::doc_comment && c.kind != TokenKind::line_comment) {
      break;
    }
    const auto gap = src.substr(c.range.end, cursor - c.range.end);
    if (std::count(gap.begin(), gap.end(), '\n') >= 2) break;
    if (!starts_line(src, c.range.begin)) break;
    if (!doc) doc = ByteRange{c.range.begin, c.range.end};
    doc->begin = c.range.begin;
    cursor = c.range.begin;
  }
  return doc;
}

std::string owner_of_nearest_type(const std::vector<Frame>& stack) {
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    if (it->kind == FrameKind::type_body) return it->owner;
  }
  return {};
}

std::string join_owner(const std::string& outer, const std::string& inner) {
  return outer.empty() ? inner : outer + "." + inner;
}

std::vector<SkeletonSegment> build_segments(
    std::string_view src, ByteRange range,
    const std::vector<std::size_t>& children,
    const std::vector<MethodFragment>& frags,
    const std::vector<std::vector<std::size_t>>& kids) {
  std::vector<SkeletonSegment> out;
  std::size_t cur = range.begin;
  for (const std::size_t c : children) {
    const auto& span = frags[c].full_span;
    if (span.begin > cur) {
      out.push_back({std::string(src.substr(cur, span.begin - cur)), {}, {}});
    }
    SkeletonSegment ref;
    ref.fragment_id = frags[c].id;
    ref.children = build_segments(src, span, kids[c], frags, kids);
    out.push_back(std::move(ref));
    cur = span.end;
  }
  if (range.end > cur) {
    out.push_back({std::string(src.substr(cur, range.end - cur)), {}, {}});
  }
  return out;
}

void collect_ids(const std::vector<SkeletonSegment>& segs,
                 std::set<std::string>& ids) {
  for (const auto& s : segs) {
    if (!s.is_fragment()) continue;
    ids.insert(s.fragment_id);
    collect_ids(s.children, ids);
  }
}

void render(const std::vector<SkeletonSegment>& segs,
            const std::map<std::string, std::string>& replacements,
            std::string& out) {
  for (const auto& s : segs) {
    if (!s.is_fragment()) {
      out += s.literal;
      continue;
    }
    if (auto it = replacements.find(s.fragment_id); it != replacements.end()) {
      out += it->second;
    } else {
      render(s.children, replacements, out);
    }
  }
}

}  // namespace

FileRole classify_role(std::string_view rel_path) {
  std::size_t start = 0;
  while (start <= rel_path.size()) {
    auto slash = rel_path.find('/', start);
    if (slash == std::string_view::npos) slash = rel_path.size();
    const auto seg = rel_path.substr(start, slash - start);
    if (seg == "test" || seg == "tests") return FileRole::test;
    start = slash + 1;
  }
  return FileRole::source;
}

SourceFile load_source_file(const std::filesystem::path& path,
                            std::string rel_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  SourceFile file;
  file.path = path;
  file.role = classify_role(rel_path);
  file.rel_path = std::move(rel_path);
  file.content = std::move(buf).str();
  return file;
}

void save_source_file(const SourceFile& file,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(file.content.data(),
            static_cast<std::streamsize>(file.content.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<SourceFile> scan_corpus(const std::filesystem::path& root,
                                    bool include_tests) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw NotADirectory(root.string());

  std::vector<std::pair<std::string, fs::path>> found;
  fs::recursive_directory_iterator it(root, ec), end;
  if (ec) throw IoError(root.string(), ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw IoError(root.string(), ec.message());
    if (!it->is_regular_file() || it->path().extension() != ".java") continue;
    auto rel = fs::relative(it->path(), root).generic_string();
    if (!include_tests && classify_role(rel) == FileRole::test) continue;
    found.emplace_back(std::move(rel), it->path());
  }
  std::sort(found.begin(), found.end());

  std::vector<SourceFile> files;
  files.reserve(found.size());
  for (auto& [rel, path] : found) {
    files.push_back(load_source_file(path, std::move(rel)));
  }
  return files;
}

std::string_view to_string(FragmentKind kind) {
  return kind == FragmentKind::constructor ? "constructor" : "method";
}

Extraction extract_fragments(const SourceFile& file) {
  const std::string_view src = file.content;
  const auto all = lex(src);
  const CodeTokens t(src, all);

  std::vector<Frame> stack(1);
  std::vector<Draft> drafts;
  int paren = 0;

  auto open_brace = [&](std::size_t i) {
    Frame& top = stack.back();
    Frame next;
    next.open_tok = i;
    next.paren_depth = paren;
    next.decl_start = i + 1;

    if (auto base = anonymous_class_base(t, i)) {
      next.kind = FrameKind::type_body;
      int* counter = nullptr;
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        if (it->kind == FrameKind::type_body) {
          counter = &it->anon_count;
          break;
        }
      }
      const int n = counter ? ++*counter : 1;
      next.owner = join_owner(owner_of_nearest_type(stack),
                              "$" + std::to_string(n));
      next.super_name = *base;
      stack.push_back(std::move(next));
      return;
    }

    if (top.kind == FrameKind::type_body && top.is_enum &&
        !top.enum_constants_done && paren == top.paren_depth) {
      const std::size_t j = skip_prefix(t, top.decl_start, i);
      if (t.is_ident(j) &&
          (j + 1 == i || (t.is(j + 1, "(") && t.match_forward(j + 1) == i - 1))) {
        next.kind = FrameKind::type_body;
        next.owner = join_owner(top.owner, std::string(t.text(j)));
        next.super_name = top.owner.substr(top.owner.rfind('.') + 1);
        stack.push_back(std::move(next));
        return;
      }
    }

    next.kind = FrameKind::block;
    if (paren == top.paren_depth) {
      const Decl decl = analyze_decl(t, top.decl_start, i);
      if (const auto* type = std::get_if<TypeDecl>(&decl)) {
        next.kind = FrameKind::type_body;
        const std::string outer = top.kind == FrameKind::type_body
                                      ? top.owner
                                      : owner_of_nearest_type(stack);
        next.owner = join_owner(outer, type->name);
        next.is_enum = type->is_enum;
        next.super_name = type->super_name;
      } else if (const auto* method = std::get_if<MethodDecl>(&decl);
                 method && top.kind == FrameKind::type_body) {
        Draft d;
        auto& f = d.fragment;
        f.owner = top.owner;
        f.owner_super = top.super_name;
        f.name = std::string(t.text(method->name_tok));
        f.arity = method->arity;
        f.varargs = method->varargs;
        f.kind = method->constructor ? FragmentKind::constructor
                                     : FragmentKind::method;
        const std::size_t sig_begin = t[method->first_tok].range.begin;
        const std::size_t sig_end = t[i - 1].range.end;
        f.signature_text = std::string(src.substr(sig_begin, sig_end - sig_begin));
        f.doc_span = find_doc(src, all, t, method->first_tok);
        f.full_span.begin = f.doc_span ? f.doc_span->begin : sig_begin;
        f.body_span.begin = t[i].range.begin;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          if (it->kind == FrameKind::method_body) {
            d.parent = it->fragment;
            break;
          }
        }
        next.kind = FrameKind::method_body;
        next.owner = top.owner;
        next.fragment = drafts.size();
        drafts.push_back(std::move(d));
      }
    }
    stack.push_back(std::move(next));
  };

  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind != TokenKind::punct) continue;
    const auto s = t.text(i);
    Frame& top = stack.back();
    if (s == "(") {
      ++paren;
    } else if (s == ")") {
      --paren;
    } else if (s == ";") {
      if (paren == top.paren_depth) {
        top.decl_start = i + 1;
        if (top.is_enum) top.enum_constants_done = true;
      }
    } else if (s == ",") {
      if (top.kind == FrameKind::type_body && top.is_enum &&
          !top.enum_constants_done && paren == top.paren_depth) {
        top.decl_start = i + 1;
      }
    } else if (s == "{") {
      open_brace(i);
    } else if (s == "}") {
      if (stack.size() == 1) throw UnbalancedBraces(file.rel_path, t[i].range.begin);
      const Frame closed = std::move(stack.back());
      stack.pop_back();
      paren = closed.paren_depth;
      if (closed.fragment) {
        auto& f = drafts[*closed.fragment].fragment;
        f.body_span.end = t[i].range.end;
        f.full_span.end = t[i].range.end;
      }
      Frame& parent = stack.back();
      if (paren == parent.paren_depth) parent.decl_start = i + 1;
    }
  }
  if (stack.size() > 1) {
    throw UnbalancedBraces(file.rel_path, t[stack.back().open_tok].range.begin);
  }

  // Drafts are created in order of their opening brace, which is also the
  // order of full_span.begin.
  Extraction out;
  out.fragments.reserve(drafts.size());
  std::map<std::string, std::size_t> seen;
  for (auto& d : drafts) {
    auto& f = d.fragment;
    std::string base = file.rel_path + "#" + join_owner(f.owner, f.name) + "/" +
                       std::to_string(f.arity);
    const std::size_t n = ++seen[base];
    f.id = n == 1 ? base : base + "@" + std::to_string(n);
  }
  std::vector<std::vector<std::size_t>> kids(drafts.size());
  std::vector<std::size_t> roots;
  for (std::size_t k = 0; k < drafts.size(); ++k) {
    if (drafts[k].parent) {
      kids[*drafts[k].parent].push_back(k);
      drafts[*drafts[k].parent].fragment.nested.push_back(
          drafts[k].fragment.full_span);
    } else {
      roots.push_back(k);
    }
  }
  for (auto& d : drafts) out.fragments.push_back(std::move(d.fragment));

  out.skeleton.file = file.rel_path;
  out.skeleton.segments = build_segments(src, ByteRange{0, src.size()}, roots,
                                         out.fragments, kids);
  return out;
}

std::string splice(const FileSkeleton& skeleton,
                   const std::map<std::string, std::string>& replacements) {
  if (!replacements.empty()) {
    std::set<std::string> ids;
    collect_ids(skeleton.segments, ids);
    for (const auto& [id, _] : replacements) {
      if (!ids.count(id)) throw UnknownFragmentId(id);
    }
  }
  std::string out;
  render(skeleton.segments, replacements, out);
  return out;
}

std::string_view fragment_text(std::string_view content,
                               const MethodFragment& fragment) {
  return content.substr(fragment.full_span.begin, fragment.full_span.size());
}

std::string own_text(std::string_view content, const MethodFragment& fragment) {
  std::string out;
  std::size_t cur = fragment.full_span.begin;
  for (const auto& inner : fragment.nested) {
    out.append(content.substr(cur, inner.begin - cur));
    cur = inner.end;
  }
  out.append(content.substr(cur, fragment.full_span.end - cur));
  return out;
}

std::string placeholder_for(std::string_view fragment_id) {
  return "/*@fragment " + std::string(fragment_id) + "*/";
}

std::string text_with_placeholders(std::string_view content,
                                   const MethodFragment& fragment,
                                   const std::vector<MethodFragment>& all) {
  std::string out;
  std::size_t cur = fragment.full_span.begin;
  for (const auto& inner : fragment.nested) {
    out.append(content.substr(cur, inner.begin - cur));
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& f) {
      return f.full_span == inner;
    });
    out += placeholder_for(it != all.end() ? it->id : std::string("?"));
    cur = inner.end;
  }
  out.append(content.substr(cur, fragment.full_span.end - cur));
  return out;
}

nlohmann::json fragments_to_json(const std::vector<MethodFragment>& fragments) {
  auto arr = nlohmann::json::array();
  for (const auto& f : fragments) {
    nlohmann::json j;
    j["id"] = f.id;
    j["owner"] = f.owner;
    j["name"] = f.name;
    j["arity"] = f.arity;
    j["kind"] = std::string(to_string(f.kind));
    j["full_span"] = {f.full_span.begin, f.full_span.end};
    j["body_span"] = {f.body_span.begin, f.body_span.end};
    j["token_count"] = f.token_count ? nlohmann::json(*f.token_count)
                                     : nlohmann::json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace fragkit
