#include "fragkit/callgraph.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "json.hpp"

namespace fragkit {
namespace {

enum class CallKind { method, constructor, this_ctor, super_ctor };

struct CallSite {
  std::string name;
  std::size_t arity = 0;
  CallKind kind = CallKind::method;
};

struct Candidate {
  const MethodFragment* fragment;
  const std::string* rel_path;
  std::string dir;
};

std::string parent_dir(const std::string& rel) {
  const auto slash = rel.rfind('/');
  return slash == std::string::npos ? std::string() : rel.substr(0, slash);
}

std::string last_segment(const std::string& owner) {
  return owner.substr(owner.rfind('.') + 1);
}

// Arguments between the parens at open/close, split on top-level commas.
// '<' only nests when it reads as a type-argument list.
std::size_t count_args(const CodeTokens& t, std::size_t open, std::size_t close) {
  if (close == open + 1) return 0;
  int depth = 0;
  std::size_t commas = 0;
  for (std::size_t k = open + 1; k < close; ++k) {
    if (t[k].kind != TokenKind::punct) continue;
    const auto s = t.text(k);
    if (s == "<" && (t.is(k - 1, ".") || t[k - 1].kind == TokenKind::identifier)) {
      if (const auto past = t.skip_type_args(k, close)) {
        if (t.is(k - 1, ".") || t.is(*past, "(") || t.is(*past, ")") ||
            t.is(*past, "::") || t.is(*past, "[")) {
          k = *past - 1;
          continue;
        }
      }
    }
    if (s == "(" || s == "[" || s == "{") {
      ++depth;
    } else if (s == ")" || s == "]" || s == "}") {
      --depth;
    } else if (s == "," && depth == 0) {
      ++commas;
    }
  }
  return commas + 1;
}

std::vector<CallSite> scan_calls(const CodeTokens& t, const MethodFragment& f) {
  std::vector<CallSite> calls;
  std::size_t lo = 0, hi = t.size();
  while (lo < hi) {  // first token at or after the body's '{'
    const std::size_t mid = (lo + hi) / 2;
    if (t[mid].range.begin < f.body_span.begin) lo = mid + 1; else hi = mid;
  }
  for (std::size_t k = lo; k < t.size() && t[k].range.begin < f.body_span.end; ++k) {
    const auto& range = t[k].range;
    if (std::any_of(f.nested.begin(), f.nested.end(),
                    [&](const ByteRange& n) { return n.contains(range.begin); })) {
      continue;
    }
    if (t[k].kind != TokenKind::identifier) continue;
    const auto word = t.text(k);
    const bool after_dot = k > 0 && t.is(k - 1, ".");

    if ((word == "this" || word == "super") && !after_dot && t.is(k + 1, "(")) {
      const auto close = t.match_forward(k + 1);
      if (!close) continue;
      calls.push_back({std::string(word), count_args(t, k + 1, *close),
                       word == "this" ? CallKind::this_ctor : CallKind::super_ctor});
      continue;
    }
    if (!t.is_ident(k) || (k > 0 && t.is(k - 1, "@"))) continue;

    std::size_t j = k;
    while (j >= 2 && t.is(j - 1, ".") && t[j - 2].kind == TokenKind::identifier &&
           !t.is(j - 2, "new")) {
      j -= 2;
    }
    const bool is_new = j >= 1 && t.is(j - 1, "new");

    std::size_t open = k + 1;
    if (is_new && t.is(open, "<")) {
      const auto past = t.skip_type_args(open, t.size());
      if (!past) continue;
      open = *past;
    }
    if (!t.is(open, "(")) continue;
    const auto close = t.match_forward(open);
    if (!close) continue;
    calls.push_back({std::string(word), count_args(t, open, *close),
                     is_new ? CallKind::constructor : CallKind::method});
  }
  return calls;
}

bool arity_matches(const MethodFragment& callee, std::size_t call_arity) {
  if (callee.arity == call_arity) return true;
  return callee.varargs && call_arity + 1 >= callee.arity;
}

}  // namespace

CallGraph build_call_graph(std::span<const ParsedFile> corpus) {
  CallGraph graph;
  std::map<std::string, std::vector<Candidate>> by_name;
  for (const auto& pf : corpus) {
    for (const auto& f : pf.fragments) {
      graph.nodes.insert(f.id);
      by_name[f.name].push_back({&f, &pf.file.rel_path, parent_dir(pf.file.rel_path)});
    }
  }

  for (const auto& pf : corpus) {
    const auto tokens = lex(pf.file.content);
    const CodeTokens t(pf.file.content, tokens);
    const std::string dir = parent_dir(pf.file.rel_path);
    for (const auto& caller : pf.fragments) {
      for (const auto& call : scan_calls(t, caller)) {
        std::string target = call.name;
        if (call.kind == CallKind::this_ctor) target = last_segment(caller.owner);
        if (call.kind == CallKind::super_ctor) target = caller.owner_super;

        std::vector<const Candidate*> matches;
        if (!target.empty()) {
          if (auto it = by_name.find(target); it != by_name.end()) {
            for (const auto& c : it->second) {
              const auto& f = *c.fragment;
              const bool ctor = f.kind == FragmentKind::constructor;
              const bool same_type = *c.rel_path == pf.file.rel_path &&
                                     f.owner == caller.owner;
              bool ok = arity_matches(f, call.arity);
              switch (call.kind) {
                case CallKind::method: ok = ok && !ctor; break;
                case CallKind::constructor: ok = ok && ctor; break;
                case CallKind::this_ctor: ok = ok && ctor && same_type; break;
                case CallKind::super_ctor: ok = ok && ctor && !same_type; break;
              }
              if (ok) matches.push_back(&c);
            }
          }
        }

        const std::function<bool(const Candidate&)> tiers[] = {
            [&](const Candidate& c) {
              return *c.rel_path == pf.file.rel_path &&
                     c.fragment->owner == caller.owner;
            },
            [&](const Candidate& c) { return *c.rel_path == pf.file.rel_path; },
            [&](const Candidate& c) { return c.dir == dir; },
            [&](const Candidate&) { return true; },
        };
        bool resolved = false;
        for (const auto& in_tier : tiers) {
          for (const auto* c : matches) {
            if (!in_tier(*c)) continue;
            ++graph.edges[{caller.id, c->fragment->id}];
            resolved = true;
          }
          if (resolved) break;
        }
        if (!resolved) graph.unresolved.insert({caller.id, call.name, call.arity});
      }
    }
  }
  return graph;
}

std::vector<std::vector<std::string>> SccDag::batches() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(order.size());
  for (const auto c : order) out.push_back(components[c]);
  return out;
}

SccDag condense(const CallGraph& graph) {
  const std::vector<std::string> ids(graph.nodes.begin(), graph.nodes.end());
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < ids.size(); ++i) index_of[ids[i]] = i;
  const std::size_t n = ids.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [edge, count] : graph.edges) {
    adj[index_of.at(edge.first)].push_back(index_of.at(edge.second));
  }

  // Iterative Tarjan.
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> raw;
  std::size_t counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!work.empty()) {
      auto& [v, next_edge] = work.back();
      if (next_edge < adj[v].size()) {
        const std::size_t w = adj[v][next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          work.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      work.pop_back();
      if (!work.empty()) {
        low[work.back().first] = std::min(low[work.back().first], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<std::size_t> members;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          members.push_back(w);
        } while (w != done);
        std::sort(members.begin(), members.end());
        raw.push_back(std::move(members));
      }
    }
  }

  // Number components by their smallest member; ids are sorted, so index
  // order is lexicographic id order.
  std::sort(raw.begin(), raw.end());
  SccDag dag;
  for (std::size_t c = 0; c < raw.size(); ++c) {
    std::vector<std::string> names;
    for (const auto v : raw[c]) {
      comp[v] = c;
      names.push_back(ids[v]);
      dag.component_of[ids[v]] = c;
    }
    dag.components.push_back(std::move(names));
  }

  const std::size_t m = raw.size();
  std::vector<std::set<std::size_t>> callees(m), callers(m);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto w : adj[v]) {
      if (comp[v] == comp[w]) continue;
      callees[comp[v]].insert(comp[w]);
      callers[comp[w]].insert(comp[v]);
    }
  }
  std::vector<std::size_t> pending(m);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t c = 0; c < m; ++c) {
    pending[c] = callees[c].size();
    if (pending[c] == 0) ready.push(c);
  }
  while (!ready.empty()) {
    const std::size_t c = ready.top();
    ready.pop();
    dag.order.push_back(c);
    for (const auto caller : callers[c]) {
      if (--pending[caller] == 0) ready.push(caller);
    }
  }
  return dag;
}

namespace {

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string export_graph(const CallGraph& graph, GraphFormat format) {
  if (format == GraphFormat::dot) {
    std::string out = "digraph cg {\n";
    for (const auto& node : graph.nodes) out += "  " + dot_quote(node) + ";\n";
    for (const auto& [edge, count] : graph.edges) {
      out += "  " + dot_quote(edge.first) + " -> " + dot_quote(edge.second) +
             " [label=\"" + std::to_string(count) + "\"];\n";
    }
    out += "}\n";
    return out;
  }
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& node : graph.nodes) j["nodes"].push_back(node);
  j["edges"] = nlohmann::json::array();
  for (const auto& [edge, count] : graph.edges) {
    j["edges"].push_back(
        nlohmann::ordered_json{{"from", edge.first}, {"to", edge.second}, {"count", count}});
  }
  j["unresolved"] = nlohmann::json::array();
  for (const auto& u : graph.unresolved) {
    j["unresolved"].push_back(
        nlohmann::ordered_json{{"from", u.from}, {"name", u.name}, {"arity", u.arity}});
  }
  return j.dump(2) + "\n";
}

CallGraph import_graph_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  CallGraph graph;
  for (const auto& node : j.at("nodes")) graph.nodes.insert(node.get<std::string>());
  for (const auto& e : j.at("edges")) {
    graph.edges[{e.at("from").get<std::string>(), e.at("to").get<std::string>()}] =
        e.at("count").get<std::size_t>();
  }
  for (const auto& u : j.at("unresolved")) {
    graph.unresolved.insert({u.at("from").get<std::string>(),
                             u.at("name").get<std::string>(),
                             u.at("arity").get<std::size_t>()});
  }
  return graph;
}

}  // namespace fragkit
