#include "unit/support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace testsupport {

namespace fs = std::filesystem;

fs::path fixtures_dir() { return FRAGKIT_FIXTURES; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("fragkit-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

class JavaGen {
 public:
  explicit JavaGen(std::mt19937_64& rng) : rng_(rng) {}

  std::string file() {
    if (coin(0.7)) line(0, "package demo." + ident() + ";");
    for (int i = pick(3); i > 0; --i) line(0, "import java.util." + type_name() + ";");
    out_ += "\n";
    for (int i = 1 + pick(2); i > 0; --i) type_decl(0, 0);
    if (coin(0.1)) {
      std::string crlf;
      for (const char c : out_) {
        if (c == '\n') crlf += '\r';
        crlf += c;
      }
      return crlf;
    }
    return out_;
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string ident() {
    static const char* words[] = {"alpha", "beta", "value", "count", "node",
                                  "item",  "data", "size",  "next",  "head"};
    return std::string(words[pick(10)]) + std::to_string(pick(50));
  }
  std::string type_name() {
    static const char* names[] = {"List", "Map", "Set", "Deque", "Optional"};
    return names[pick(5)];
  }
  std::string simple_type() {
    static const char* types[] = {"int",          "String",      "long[]",
                                  "List<String>", "Map<String, List<Integer>>",
                                  "Object",       "double",      "T"};
    return types[pick(8)];
  }

  void line(int depth, const std::string& text) {
    out_.append(static_cast<std::size_t>(depth) * 4, ' ');
    out_ += text;
    out_ += "\n";
  }

  void doc(int depth) {
    switch (pick(4)) {
      case 0:
        line(depth, "/**");
        line(depth, " * Docs with a brace { and } inside.");
        line(depth, " */");
        break;
      case 1:
        line(depth, "// line doc }");
        line(depth, "// second line {");
        break;
      default:
        break;
    }
  }

  std::string modifiers() {
    static const char* mods[] = {"public ", "private ", "protected ", "static ",
                                 "final ",  "synchronized "};
    std::string m;
    if (coin(0.3)) m += "@SuppressWarnings({\"unchecked\", \"rawtypes\"}) ";
    if (coin(0.2)) m += "@Deprecated ";
    for (int i = pick(3); i > 0; --i) m += mods[pick(6)];
    return m;
  }

  std::string params() {
    const int n = pick(4);
    std::string p;
    for (int i = 0; i < n; ++i) {
      if (i) p += ", ";
      if (coin(0.2)) p += "final ";
      if (coin(0.1)) p += "@Nullable ";
      if (i == n - 1 && coin(0.2)) {
        p += "String... " + ident();
      } else {
        p += simple_type() + " " + ident();
      }
    }
    return "(" + p + ")";
  }

  void method(int depth, int nest) {
    doc(depth);
    std::string head = modifiers();
    if (coin(0.2)) head += "<T extends Comparable<T>> ";
    head += (coin(0.3) ? std::string("void") : simple_type()) + " " + ident() + params();
    if (coin(0.2)) head += " throws java.io.IOException";
    line(depth, head + " {");
    block_body(depth + 1, nest);
    line(depth, "}");
  }

  void constructor(int depth, int nest, const std::string& type) {
    doc(depth);
    line(depth, modifiers() + type + params() + " {");
    if (coin(0.3)) line(depth + 1, "this.hashCode();");
    block_body(depth + 1, nest);
    line(depth, "}");
  }

  void block_body(int depth, int nest) {
    for (int i = pick(5); i > 0; --i) statement(depth, nest);
  }

  void statement(int depth, int nest) {
    const bool deep = nest >= 3;
    switch (pick(deep ? 10 : 17)) {
      case 0:
        line(depth, "int " + ident() + " = " + std::to_string(pick(100)) + ";");
        break;
      case 1:
        line(depth, "String s" + std::to_string(pick(9)) + " = \"{ } \\\" {\";");
        break;
      case 2:
        line(depth, std::string("char c = ") +
                        (coin(0.5) ? "'{'" : coin(0.5) ? "'}'" : "'\\''") + ";");
        break;
      case 3:
        line(depth, "/* } { unbalanced in a comment */");
        break;
      case 4:
        line(depth, "// } trailing comment {");
        break;
      case 5:
        line(depth, "helper(" + std::to_string(pick(9)) + ", \"x\", other(2));");
        break;
      case 6:
        line(depth, "int[][] grid = {{1, 2}, {3}};");
        break;
      case 7:
        line(depth, "String t = \"\"\"");
        line(depth + 1, "{ text block with braces }}");
        line(depth + 1, "\"\"\";");
        break;
      case 8:
        line(depth, "String u = \"h\xc3\xa9llo \xe2\x9c\x93 }\";");
        break;
      case 9:
        line(depth, "List<Map<String, Integer>> m = new ArrayList<>();");
        break;
      case 10:
        line(depth, "if (" + ident() + " > 0) {");
        block_body(depth + 1, nest + 1);
        line(depth, "} else {");
        block_body(depth + 1, nest + 1);
        line(depth, "}");
        break;
      case 11:
        line(depth, "for (int i = 0; i < 10; i++) {");
        block_body(depth + 1, nest + 1);
        line(depth, "}");
        break;
      case 12:
        line(depth, "Runnable r = () -> {");
        block_body(depth + 1, nest + 1);
        line(depth, "};");
        break;
      case 13:
        line(depth, "Object o = new Object() {");
        line(depth + 1, "@Override");
        line(depth + 1, "public int hashCode() {");
        block_body(depth + 2, nest + 1);
        line(depth + 2, "return 1;");
        line(depth + 1, "}");
        line(depth, "};");
        break;
      case 14:
        line(depth, "class Local" + std::to_string(pick(9)) + " {");
        line(depth + 1, "int g() {");
        block_body(depth + 2, nest + 1);
        line(depth + 2, "return 0;");
        line(depth + 1, "}");
        line(depth, "}");
        break;
      case 15:
        line(depth, "switch (" + ident() + ") {");
        line(depth + 1, "case 1: {");
        block_body(depth + 2, nest + 1);
        line(depth + 2, "break;");
        line(depth + 1, "}");
        line(depth + 1, "default:");
        line(depth + 2, "break;");
        line(depth, "}");
        break;
      default:
        line(depth, "try {");
        block_body(depth + 1, nest + 1);
        line(depth, "} catch (Exception e) {");
        line(depth + 1, "throw new RuntimeException(\"}\", e);");
        line(depth, "} finally {");
        line(depth, "}");
        break;
    }
  }

  void field(int depth, int nest) {
    switch (pick(4)) {
      case 0:
        line(depth, "private int " + ident() + " = 1;");
        break;
      case 1:
        line(depth, "static final String K = \"}{\";");
        break;
      case 2:
        line(depth, "Runnable task = () -> {");
        block_body(depth + 1, nest + 1);
        line(depth, "};");
        break;
      default:
        line(depth, "Comparator<String> cmp = new Comparator<String>() {");
        line(depth + 1, "public int compare(String a, String b) {");
        block_body(depth + 2, nest + 1);
        line(depth + 2, "return 0;");
        line(depth + 1, "}");
        line(depth, "};");
        break;
    }
  }

  void members(int depth, int nest, const std::string& type, bool is_interface) {
    for (int i = pick(6); i > 0; --i) {
      switch (pick(nest < 2 ? 7 : 6)) {
        case 0:
          field(depth, nest);
          break;
        case 1:
        case 2:
          if (is_interface) {
            line(depth, "default int " + ident() + "() {");
            block_body(depth + 1, nest);
            line(depth + 1, "return 0;");
            line(depth, "}");
          } else {
            method(depth, nest);
          }
          break;
        case 3:
          if (is_interface) {
            line(depth, "void " + ident() + params() + ";");
          } else {
            constructor(depth, nest, type);
          }
          break;
        case 4:
          line(depth, "abstract " + simple_type() + " " + ident() + params() + ";");
          break;
        case 5:
          if (is_interface) break;
          line(depth, coin(0.5) ? "static {" : "{");
          block_body(depth + 1, nest + 1);
          line(depth, "}");
          break;
        default:
          type_decl(depth, nest + 1);
          break;
      }
    }
  }

  void type_decl(int depth, int nest) {
    const std::string name = "T" + std::to_string(++type_counter_);
    switch (pick(5)) {
      case 0: {
        line(depth, "public interface " + name + "<K, V> {");
        members(depth + 1, nest, name, true);
        line(depth, "}");
        break;
      }
      case 1: {
        line(depth, "enum " + name + " {");
        line(depth + 1, "A,");
        line(depth + 1, "B(2),");
        line(depth + 1, "C {");
        line(depth + 2, "int weight() {");
        block_body(depth + 3, nest + 1);
        line(depth + 3, "return 3;");
        line(depth + 2, "}");
        line(depth + 1, "};");
        line(depth + 1, name + "() {");
        line(depth + 1, "}");
        line(depth + 1, name + "(int w) {");
        line(depth + 2, "this();");
        line(depth + 1, "}");
        members(depth + 1, nest, name, false);
        line(depth, "}");
        break;
      }
      case 2: {
        line(depth, "record " + name + "(int x, String y) {");
        line(depth + 1, name + " {");
        line(depth + 2, "if (x < 0) throw new IllegalArgumentException(\"{\");");
        line(depth + 1, "}");
        line(depth + 1, "int sum() {");
        line(depth + 2, "return x + y.length();");
        line(depth + 1, "}");
        line(depth, "}");
        break;
      }
      default: {
        std::string head = "public ";
        if (coin(0.3)) head += "abstract ";
        head += "class " + name;
        if (coin(0.3)) head += "<T extends Comparable<T>>";
        if (coin(0.3)) head += " extends Base" + std::to_string(pick(3));
        if (coin(0.3)) head += " implements Runnable, Comparable<" + name + ">";
        line(depth, head + " {");
        members(depth + 1, nest, name, false);
        line(depth, "}");
        break;
      }
    }
  }

  std::mt19937_64& rng_;
  std::string out_;
  int type_counter_ = 0;
};

}  // namespace

std::string random_java_file(std::mt19937_64& rng) { return JavaGen(rng).file(); }

std::string add_brace_noise(std::string_view content,
                            const std::vector<std::size_t>& body_begins) {
  static constexpr std::string_view noise =
      " String n$ = \"}{}\"; char q$ = '}'; /* { */ // }\n";
  std::vector<std::size_t> at(body_begins);
  std::sort(at.begin(), at.end());
  std::string out;
  std::size_t cur = 0;
  for (const auto b : at) {
    out.append(content.substr(cur, b + 1 - cur));
    out += noise;
    cur = b + 1;
  }
  out.append(content.substr(cur));
  return out;
}

std::size_t regex_fallback_count(const std::string& text) {
  static const std::regex token(R"([A-Za-z0-9_$]+|[^A-Za-z0-9_$ \t\r\n\f\v])");
  std::size_t n = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), token);
       it != std::sregex_iterator(); ++it) {
    const auto len = static_cast<std::size_t>(it->length());
    const char c = it->str()[0];
    const bool word = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    n += word ? (len + 7) / 8 : 1;
  }
  return n;
}

std::vector<fragkit::TokenModel::Merge> random_merges(std::mt19937_64& rng,
                                                      std::string_view alphabet,
                                                      std::size_t count) {
  std::vector<std::string> vocab;
  for (const char c : alphabet) vocab.emplace_back(1, c);
  std::set<fragkit::TokenModel::Merge> seen;
  std::vector<fragkit::TokenModel::Merge> merges;
  for (std::size_t tries = 0; merges.size() < count && tries < count * 20; ++tries) {
    std::uniform_int_distribution<std::size_t> d(0, vocab.size() - 1);
    fragkit::TokenModel::Merge m{vocab[d(rng)], vocab[d(rng)]};
    if (!seen.insert(m).second) continue;
    merges.push_back(m);
    vocab.push_back(m.first + m.second);
  }
  return merges;
}

std::string random_text(std::mt19937_64& rng, std::string_view alphabet,
                        std::size_t max_len) {
  const auto len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  std::uniform_int_distribution<std::size_t> d(0, alphabet.size() - 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[d(rng)]);
  return s;
}

std::vector<std::string> brute_force_bpe(
    const std::vector<fragkit::TokenModel::Merge>& merges, std::string_view text) {
  std::map<fragkit::TokenModel::Merge, std::size_t> rank;
  for (std::size_t i = 0; i < merges.size(); ++i) rank.emplace(merges[i], i);
  std::vector<std::string> sym;
  for (const char c : text) sym.emplace_back(1, c);
  for (;;) {
    std::size_t best = merges.size();
    std::size_t where = 0;
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
      const auto it = rank.find({sym[i], sym[i + 1]});
      if (it != rank.end() && it->second < best) {
        best = it->second;
        where = i;
      }
    }
    if (best == merges.size()) return sym;
    sym[where] += sym[where + 1];
    sym.erase(sym.begin() + static_cast<std::ptrdiff_t>(where) + 1);
  }
}

fragkit::CallGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes) {
  fragkit::CallGraph g;
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  const double density = std::uniform_real_distribution<double>(0.0, 0.35)(rng);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back("n" + std::to_string(i / 10) + std::to_string(i % 10));
    g.nodes.insert(names.back());
  }
  std::bernoulli_distribution edge(density);
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (edge(rng)) g.edges[{a, b}] = 1 + rng() % 3;
    }
  }
  return g;
}

std::set<std::set<std::string>> reachability_components(const fragkit::CallGraph& g) {
  const std::vector<std::string> names(g.nodes.begin(), g.nodes.end());
  const std::size_t n = names.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[names[i]] = i;
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& [e, _] : g.edges) reach[index[e.first]][index[e.second]] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
      }
    }
  }
  std::set<std::set<std::string>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::string> c;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j] && reach[j][i]) c.insert(names[j]);
    }
    out.insert(c);
  }
  return out;
}

std::set<std::set<std::string>> as_sets(const fragkit::SccDag& dag) {
  std::set<std::set<std::string>> out;
  for (const auto& c : dag.components) out.emplace(c.begin(), c.end());
  return out;
}

bool bottom_up(const fragkit::CallGraph& g, const fragkit::SccDag& dag) {
  std::vector<std::size_t> position(dag.components.size());
  for (std::size_t i = 0; i < dag.order.size(); ++i) position[dag.order[i]] = i;
  for (const auto& [e, _] : g.edges) {
    const auto from = dag.component_of.at(e.first);
    const auto to = dag.component_of.at(e.second);
    if (from != to && position[to] >= position[from]) return false;
  }
  return dag.order.size() == dag.components.size();
}

const std::vector<PublishedRow>& published_rows() {
  static const std::vector<PublishedRow> rows = {
      {"bcel", 11.29, 4094, 70.42, 0.15, 3.44},
      {"beanutils", 29.84, 2675, 107.09, 0.07, 5.23},
      {"cli", 30.77, 582, 97.91, 0.17, 4.78},
      {"codec", 48.30, 1788, 189.29, 0.84, 9.24},
      {"collections", 19.34, 6354, 74.37, 0.02, 3.63},
      {"csv", 27.08, 871, 102.53, 0.11, 5.01},
      {"daemon", 27.78, 60, 108.63, 0.00, 5.30},
      {"dbcp", 38.52, 3622, 63.02, 0.03, 3.08},
      {"dbutils", 13.54, 869, 61.44, 0.00, 3.00},
      {"fileupload", 16.67, 401, 77.8, 0.00, 3.80},
      {"geometry", 39.13, 6615, 124.93, 0.03, 6.10},
      {"imaging", 14.78, 2530, 143.71, 0.20, 7.02},
      {"io", 22.07, 5957, 77.94, 0.07, 3.81},
      {"jexl", 25.70, 3967, 109.37, 0.20, 5.34},
      {"lang", 40.34, 9134, 103.33, 0.12, 5.05},
      {"net", 23.83, 2023, 98.22, 0.15, 4.80},
      {"pool", 22.68, 1377, 94.13, 0.00, 4.60},
      {"rng", 36.60, 3245, 139.69, 0.52, 6.82},
      {"text", 28.32, 2712, 99.85, 0.04, 4.88},
      {"validator", 38.00, 1181, 147.42, 0.17, 7.20},
  };
  return rows;
}

}  // namespace testsupport
