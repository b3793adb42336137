#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fragkit/source_model.hpp"

namespace fragkit {

struct UnresolvedCall {
  std::string from;
  std::string name;
  std::size_t arity = 0;

  auto operator<=>(const UnresolvedCall&) const = default;
};

/// Fragment-level call graph. Edges are a set; the mapped value is the number
/// of call sites that produced the edge.
struct CallGraph {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, std::size_t> edges;
  std::set<UnresolvedCall> unresolved;

  bool operator==(const CallGraph&) const = default;
};

/// Name/arity resolution over fragment bodies. Candidate tiers: same owner,
/// same file, same directory, whole corpus; the first non-empty tier gets an
/// edge to each of its candidates.
CallGraph build_call_graph(std::span<const ParsedFile> corpus);

/// Strongly connected components in callee-first topological order.
struct SccDag {
  std::vector<std::vector<std::string>> components;  // members sorted
  std::vector<std::size_t> order;                    // indices into components
  std::map<std::string, std::size_t> component_of;

  /// Components in `order`; the translation batches.
  std::vector<std::vector<std::string>> batches() const;
};

/// Ties between ready components go to the smallest member id.
SccDag condense(const CallGraph& graph);

enum class GraphFormat { dot, json };

std::string export_graph(const CallGraph& graph, GraphFormat format);
/// Inverse of the JSON export. Throws nlohmann::json::exception on bad input.
CallGraph import_graph_json(std::string_view text);

}  // namespace fragkit
