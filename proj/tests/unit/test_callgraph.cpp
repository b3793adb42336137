#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fragkit/callgraph.hpp"
#include "fragkit/source_model.hpp"
#include "unit/support.hpp"

using namespace fragkit;

namespace {

ParsedFile parsed(std::string rel, std::string content) {
  SourceFile f;
  f.path = rel;
  f.rel_path = std::move(rel);
  f.content = std::move(content);
  auto ex = extract_fragments(f);
  return ParsedFile{std::move(f), std::move(ex.fragments), std::move(ex.skeleton)};
}

using Edge = std::pair<std::string, std::string>;

std::vector<Edge> edge_list(const CallGraph& g) {
  std::vector<Edge> out;
  for (const auto& [e, _] : g.edges) out.push_back(e);
  return out;
}

CallGraph graph_of(std::initializer_list<const char*> nodes,
                   std::initializer_list<Edge> edges) {
  CallGraph g;
  for (const auto* n : nodes) g.nodes.insert(n);
  for (const auto& e : edges) g.edges[e] = 1;
  return g;
}

}  // namespace

TEST_SUITE("callgraph") {
  TEST_CASE("no call sites") {
    const std::vector<ParsedFile> files{
        parsed("A.java", "class A { int f(int x) { return x+1; } }")};
    const auto g = build_call_graph(files);
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK(g.unresolved.empty());
  }

  TEST_CASE("chain resolves and orders callees first") {
    const std::vector<ParsedFile> files{parsed(
        "A.java", "class A { void a() { b(); } void b() { c(); } void c() { } }")};
    const auto g = build_call_graph(files);
    CHECK(edge_list(g) == std::vector<Edge>{{"A.java#A.a/0", "A.java#A.b/0"},
                                            {"A.java#A.b/0", "A.java#A.c/0"}});
    const auto batches = condense(g).batches();
    CHECK(batches == std::vector<std::vector<std::string>>{
                         {"A.java#A.c/0"}, {"A.java#A.b/0"}, {"A.java#A.a/0"}});
  }

  TEST_CASE("same owner wins over other classes") {
    const std::vector<ParsedFile> files{
        parsed("p/A.java", "class A { void g(int x) { } void h() { g(1); } }"),
        parsed("p/B.java", "class B { void g(int y) { } }"),
    };
    const auto g = build_call_graph(files);
    CHECK(edge_list(g) == std::vector<Edge>{{"p/A.java#A.h/0", "p/A.java#A.g/1"}});
  }

  TEST_CASE("tiers fall back to directory then corpus, edges to all candidates") {
    const std::vector<ParsedFile> files{
        parsed("p/A.java", "class A { void h() { g(1); k(); } }"),
        parsed("p/B.java", "class B { void g(int y) { } }"),
        parsed("p/C.java", "class C { void g(int y) { } }"),
        parsed("q/D.java", "class D { void g(int y) { } void k() { } }"),
    };
    const auto g = build_call_graph(files);
    CHECK(edge_list(g) == std::vector<Edge>{{"p/A.java#A.h/0", "p/B.java#B.g/1"},
                                            {"p/A.java#A.h/0", "p/C.java#C.g/1"},
                                            {"p/A.java#A.h/0", "q/D.java#D.k/0"}});
  }

  TEST_CASE("keywords are not calls and arity counts top-level commas") {
    const std::vector<ParsedFile> files{parsed(
        "A.java",
        "class A {\n"
        "  void f(int a, int[] b) { }\n"
        "  void f(int a) { }\n"
        "  void g() {\n"
        "    if (x) { } while (y) { } for (;;) { } switch (z) { }\n"
        "    synchronized (this) { } return;\n"
        "  }\n"
        "  void h() { f(m(1, 2), new int[]{1, 2}); obj.f(3); }\n"
        "  int m(int p, int q) { return p; }\n"
        "}\n")};
    const auto g = build_call_graph(files);
    CHECK(edge_list(g) == std::vector<Edge>{{"A.java#A.h/0", "A.java#A.f/1"},
                                            {"A.java#A.h/0", "A.java#A.f/2"},
                                            {"A.java#A.h/0", "A.java#A.m/2"}});
    CHECK(g.unresolved.empty());
  }

  TEST_CASE("constructors via new, this and super") {
    const std::vector<ParsedFile> files{
        parsed("Base.java", "class Base { Base(int x) { } }"),
        parsed("Kid.java",
               "class Kid extends Base {\n"
               "  Kid() { this(1); }\n"
               "  Kid(int x) { super(x); }\n"
               "  static Kid make() { return new Kid(); }\n"
               "}\n"),
    };
    const auto g = build_call_graph(files);
    CHECK(edge_list(g) ==
          std::vector<Edge>{{"Kid.java#Kid.Kid/0", "Kid.java#Kid.Kid/1"},
                            {"Kid.java#Kid.Kid/1", "Base.java#Base.Base/1"},
                            {"Kid.java#Kid.make/0", "Kid.java#Kid.Kid/0"}});
  }

  TEST_CASE("varargs accept any trailing count") {
    const std::vector<ParsedFile> files{parsed(
        "A.java",
        "class A { void v(int a, String... r) { }\n"
        "  void c() { v(1); v(1, \"a\"); v(1, \"a\", \"b\"); v(); } }")};
    const auto g = build_call_graph(files);
    CHECK(g.edges.at({"A.java#A.c/0", "A.java#A.v/2"}) == 3);
    CHECK(g.unresolved == std::set<UnresolvedCall>{{"A.java#A.c/0", "v", 0}});
  }

  TEST_CASE("unresolved calls are recorded once") {
    const std::vector<ParsedFile> files{parsed(
        "A.java", "class A { void p() { System.out.println(1); System.out.println(2); } }")};
    const auto g = build_call_graph(files);
    CHECK(g.edges.empty());
    CHECK(g.unresolved == std::set<UnresolvedCall>{{"A.java#A.p/0", "println", 1}});
  }

  TEST_CASE("self recursion is one edge with its site count") {
    const std::vector<ParsedFile> files{
        parsed("A.java", "class A { int f(int n) { return n == 0 ? 0 : f(n - 1) + f(n - 2); } }")};
    const auto g = build_call_graph(files);
    CHECK(g.edges.size() == 1);
    CHECK(g.edges.at({"A.java#A.f/1", "A.java#A.f/1"}) == 2);
    const auto dag = condense(g);
    CHECK(dag.components.size() == 1);
  }

  TEST_CASE("mutual recursion in the fixture forms one batch") {
    const auto root = testsupport::fixtures_dir() / "budget22";
    std::vector<ParsedFile> files;
    for (auto& sf : scan_corpus(root, false)) {
      auto ex = extract_fragments(sf);
      files.push_back({std::move(sf), std::move(ex.fragments), std::move(ex.skeleton)});
    }
    const auto dag = condense(build_call_graph(files));
    const auto batches = dag.batches();
    const auto it = std::find_if(batches.begin(), batches.end(),
                                 [](const auto& b) { return b.size() > 1; });
    REQUIRE(it != batches.end());
    CHECK(it->size() == 2);
    CHECK(it->front().find("isEvenDepth") != std::string::npos);
    CHECK(it->back().find("isOddDepth") != std::string::npos);
  }

  TEST_CASE("file order does not matter") {
    const auto root = testsupport::fixtures_dir() / "budget22";
    std::vector<ParsedFile> files;
    for (auto& sf : scan_corpus(root, false)) {
      auto ex = extract_fragments(sf);
      files.push_back({std::move(sf), std::move(ex.fragments), std::move(ex.skeleton)});
    }
    const auto g = build_call_graph(files);
    std::reverse(files.begin(), files.end());
    const auto r = build_call_graph(files);
    CHECK(g == r);
    CHECK(condense(g).batches() == condense(r).batches());
  }

  TEST_CASE("condense examples") {
    const auto none = condense(graph_of({"b", "a"}, {}));
    CHECK(none.batches() == std::vector<std::vector<std::string>>{{"a"}, {"b"}});

    const auto chain = condense(graph_of({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}));
    CHECK(chain.batches() == std::vector<std::vector<std::string>>{{"c"}, {"b"}, {"a"}});

    const auto cyc =
        condense(graph_of({"a", "b", "c"}, {{"a", "b"}, {"b", "a"}, {"c", "a"}}));
    CHECK(cyc.batches() == std::vector<std::vector<std::string>>{{"a", "b"}, {"c"}});
    CHECK(cyc.component_of.at("a") == cyc.component_of.at("b"));
  }

  TEST_CASE("SCCs match the reachability oracle") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
      const auto g = testsupport::random_graph(rng, 12);
      const auto dag = condense(g);
      CHECK(testsupport::as_sets(dag) == testsupport::reachability_components(g));
      CHECK(testsupport::bottom_up(g, dag));
    }
  }

  TEST_CASE("export formats") {
    CHECK(export_graph(CallGraph{}, GraphFormat::dot) == "digraph cg {\n}\n");
    auto g = graph_of({"a", "b"}, {});
    g.edges[{"a", "b"}] = 2;
    g.unresolved.insert({"a", "zz", 3});
    const auto dot = export_graph(g, GraphFormat::dot);
    CHECK(dot.find("  \"a\" -> \"b\" [label=\"2\"];\n") != std::string::npos);
    CHECK(import_graph_json(export_graph(g, GraphFormat::json)) == g);
    CHECK(export_graph(g, GraphFormat::json) == export_graph(g, GraphFormat::json));
  }
}
