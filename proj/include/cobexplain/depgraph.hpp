#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cobexplain/program.hpp"

namespace cobexplain::depgraph {

enum class GraphKind { Function, File };

struct DepGraph {
  GraphKind kind = GraphKind::Function;
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
  // (caller, target) pairs that did not resolve to a node; dynamic CALLs and
  // unknown names land here instead of becoming edges.
  std::vector<std::pair<std::string, std::string>> unresolved;
  std::set<std::string> self_loops;
};

struct Component {
  std::vector<std::string> members;  // sorted
  bool cyclic = false;
};

struct Condensation {
  std::vector<Component> components;  // ordered by smallest member
  std::set<std::pair<int, int>> dag_edges;
  std::map<std::string, int> component_of;
};

struct TopoRanking {
  std::map<std::string, int> rank;
};

struct RefinementOrder {
  Condensation condensation;
  // layers[0] holds components with no outgoing DAG edges; each layer lists
  // component indices ordered by smallest member name.
  std::vector<std::vector<int>> layers;
};

DepGraph build_function_graph(const cobol::Program& program);

DepGraph build_file_graph(
    const std::vector<std::pair<std::string, const cobol::Program*>>& files);

Condensation condense(const DepGraph& graph);

// Longest-path depth from the in-degree-0 components of the condensation.
TopoRanking topo_ranks(const Condensation& condensation);

RefinementOrder refinement_order(const DepGraph& graph);

}  // namespace cobexplain::depgraph
