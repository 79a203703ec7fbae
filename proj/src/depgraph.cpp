#include "cobexplain/depgraph.hpp"

#include <algorithm>

#include "cobexplain/errors.hpp"

namespace cobexplain::depgraph {

using cobol::Program;
using cobol::StatementKind;
using cobol::StatementRef;
using cobol::to_upper;

namespace {

void add_edge(DepGraph& graph, const std::string& from, const std::string& to) {
  if (from == to) graph.self_loops.insert(from);
  graph.edges.emplace(from, to);
}

struct FunctionResolver {
  std::map<std::string, std::string> canonical;  // folded -> declared
  std::vector<std::string> paragraph_order;      // declared names, source order

  explicit FunctionResolver(const Program& program) {
    for (const auto& paragraph : program.paragraphs) {
      canonical.emplace(to_upper(paragraph.name), paragraph.name);
      paragraph_order.push_back(paragraph.name);
    }
    for (const auto& section : program.sections) {
      canonical.emplace(to_upper(section.name), section.name);
    }
  }

  void resolve(DepGraph& graph, const std::string& caller, const std::string& target) const {
    auto it = canonical.find(to_upper(target));
    if (it == canonical.end()) {
      graph.unresolved.emplace_back(caller, target);
    } else {
      add_edge(graph, caller, it->second);
    }
  }

  void resolve_thru(DepGraph& graph, const std::string& caller, const std::string& from,
                    const std::string& to) const {
    auto position = [&](const std::string& name) -> std::size_t {
      std::string upper = to_upper(name);
      for (std::size_t i = 0; i < paragraph_order.size(); ++i) {
        if (to_upper(paragraph_order[i]) == upper) return i;
      }
      return std::string::npos;
    };
    std::size_t a = position(from);
    std::size_t b = position(to);
    if (a != std::string::npos && b != std::string::npos && a <= b) {
      for (std::size_t i = a; i <= b; ++i) add_edge(graph, caller, paragraph_order[i]);
      return;
    }
    resolve(graph, caller, from);
    resolve(graph, caller, to);
  }

  void resolve_statements(DepGraph& graph, const std::string& caller,
                          const std::vector<StatementRef>& statements) const {
    for (const auto& ref : statements) {
      switch (ref.kind) {
        case StatementKind::Perform:
        case StatementKind::GoTo:
          resolve(graph, caller, ref.targets[0]);
          break;
        case StatementKind::PerformThru:
          resolve_thru(graph, caller, ref.targets[0], ref.targets[1]);
          break;
        default:
          break;
      }
    }
  }
};

}  // namespace

DepGraph build_function_graph(const Program& program) {
  DepGraph graph;
  graph.kind = GraphKind::Function;
  FunctionResolver resolver(program);

  // Units are walked in source order so unresolved targets keep their
  // encounter order across interleaved paragraphs and sections.
  std::vector<std::pair<int, std::pair<bool, std::size_t>>> order;
  for (std::size_t i = 0; i < program.paragraphs.size(); ++i) {
    order.push_back({program.paragraphs[i].span.first, {false, i}});
  }
  for (std::size_t i = 0; i < program.sections.size(); ++i) {
    order.push_back({program.sections[i].span.first, {true, i}});
  }
  std::sort(order.begin(), order.end());

  for (const auto& [line, unit] : order) {
    if (unit.first) {
      const auto& section = program.sections[unit.second];
      graph.nodes.insert(section.name);
      resolver.resolve_statements(graph, section.name, section.statements);
      // Performing a section runs its member paragraphs in order.
      for (const auto& member : section.paragraphs) add_edge(graph, section.name, member);
    } else {
      const auto& paragraph = program.paragraphs[unit.second];
      graph.nodes.insert(paragraph.name);
      resolver.resolve_statements(graph, paragraph.name, paragraph.statements);
    }
  }
  return graph;
}

DepGraph build_file_graph(
    const std::vector<std::pair<std::string, const Program*>>& files) {
  DepGraph graph;
  graph.kind = GraphKind::File;

  std::map<std::string, std::string> by_program_id;  // folded id -> file
  for (const auto& [file, program] : files) {
    graph.nodes.insert(file);
    if (!program->program_id) continue;
    std::string key = to_upper(*program->program_id);
    auto [it, inserted] = by_program_id.emplace(key, file);
    if (!inserted) {
      throw AmbiguousProgramIdError("program id '" + *program->program_id + "' declared by " +
                                    it->second + " and " + file);
    }
  }

  auto resolve_call = [&](const std::string& file, const StatementRef& ref) {
    if (ref.kind == StatementKind::CallDynamic) {
      graph.unresolved.emplace_back(file, ref.targets[0]);
      return;
    }
    if (ref.kind != StatementKind::CallLiteral && ref.kind != StatementKind::Link) return;
    auto it = by_program_id.find(to_upper(ref.targets[0]));
    if (it == by_program_id.end()) {
      graph.unresolved.emplace_back(file, ref.targets[0]);
    } else {
      add_edge(graph, file, it->second);
    }
  };

  for (const auto& [file, program] : files) {
    for (const auto& paragraph : program->paragraphs) {
      for (const auto& ref : paragraph.statements) resolve_call(file, ref);
    }
    for (const auto& section : program->sections) {
      for (const auto& ref : section.statements) resolve_call(file, ref);
    }
  }
  return graph;
}

Condensation condense(const DepGraph& graph) {
  std::vector<std::string> names(graph.nodes.begin(), graph.nodes.end());
  std::map<std::string, int> id;
  for (std::size_t i = 0; i < names.size(); ++i) id[names[i]] = static_cast<int>(i);

  int n = static_cast<int>(names.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& [from, to] : graph.edges) {
    adj[id.at(from)].push_back(id.at(to));
  }

  // Iterative Tarjan.
  std::vector<int> index(n, -1);
  std::vector<int> lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> component(n, -1);
  std::vector<int> stack;
  int next_index = 0;
  int component_count = 0;

  struct Frame {
    int node;
    std::size_t child;
  };

  for (int start = 0; start < n; ++start) {
    if (index[start] != -1) continue;
    std::vector<Frame> frames{{start, 0}};
    index[start] = lowlink[start] = next_index++;
    stack.push_back(start);
    on_stack[start] = true;

    while (!frames.empty()) {
      Frame& frame = frames.back();
      int u = frame.node;
      if (frame.child < adj[u].size()) {
        int v = adj[u][frame.child++];
        if (index[v] == -1) {
          index[v] = lowlink[v] = next_index++;
          stack.push_back(v);
          on_stack[v] = true;
          frames.push_back({v, 0});
        } else if (on_stack[v]) {
          lowlink[u] = std::min(lowlink[u], index[v]);
        }
      } else {
        frames.pop_back();
        if (!frames.empty()) {
          lowlink[frames.back().node] = std::min(lowlink[frames.back().node], lowlink[u]);
        }
        if (lowlink[u] == index[u]) {
          while (true) {
            int v = stack.back();
            stack.pop_back();
            on_stack[v] = false;
            component[v] = component_count;
            if (v == u) break;
          }
          ++component_count;
        }
      }
    }
  }

  std::vector<Component> components(component_count);
  for (int v = 0; v < n; ++v) {
    components[component[v]].members.push_back(names[v]);
  }
  for (auto& comp : components) std::sort(comp.members.begin(), comp.members.end());

  // Reorder components by smallest member for stable output.
  std::vector<int> order(component_count);
  for (int i = 0; i < component_count; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return components[a].members.front() < components[b].members.front();
  });
  std::vector<int> renumber(component_count);
  for (int i = 0; i < component_count; ++i) renumber[order[i]] = i;

  Condensation cond;
  cond.components.resize(component_count);
  for (int i = 0; i < component_count; ++i) {
    cond.components[renumber[i]] = std::move(components[i]);
  }
  for (int v = 0; v < n; ++v) {
    cond.component_of[names[v]] = renumber[component[v]];
  }
  for (const auto& [from, to] : graph.edges) {
    int a = cond.component_of.at(from);
    int b = cond.component_of.at(to);
    if (a != b) cond.dag_edges.emplace(a, b);
  }
  for (auto& comp : cond.components) {
    comp.cyclic = comp.members.size() > 1;
  }
  for (const auto& node : graph.self_loops) {
    cond.components[cond.component_of.at(node)].cyclic = true;
  }
  return cond;
}

TopoRanking topo_ranks(const Condensation& condensation) {
  int n = static_cast<int>(condensation.components.size());
  std::vector<std::vector<int>> adj(n);
  std::vector<int> indegree(n, 0);
  for (const auto& [a, b] : condensation.dag_edges) {
    adj[a].push_back(b);
    ++indegree[b];
  }

  std::vector<int> rank(n, 0);
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  for (std::size_t q = 0; q < queue.size(); ++q) {
    int u = queue[q];
    for (int v : adj[u]) {
      rank[v] = std::max(rank[v], rank[u] + 1);
      if (--indegree[v] == 0) queue.push_back(v);
    }
  }

  TopoRanking ranking;
  for (int i = 0; i < n; ++i) {
    for (const auto& member : condensation.components[i].members) {
      ranking.rank[member] = rank[i];
    }
  }
  return ranking;
}

RefinementOrder refinement_order(const DepGraph& graph) {
  RefinementOrder order;
  order.condensation = condense(graph);
  const Condensation& cond = order.condensation;

  int n = static_cast<int>(cond.components.size());
  std::vector<int> outdegree(n, 0);
  std::vector<std::vector<int>> rev(n);  // callee -> callers
  for (const auto& [a, b] : cond.dag_edges) {
    ++outdegree[a];
    rev[b].push_back(a);
  }

  // layer = longest chain of outgoing DAG edges below the component.
  std::vector<int> layer(n, 0);
  std::vector<int> remaining = outdegree;
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    if (remaining[i] == 0) queue.push_back(i);
  }
  for (std::size_t q = 0; q < queue.size(); ++q) {
    int u = queue[q];
    for (int caller : rev[u]) {
      layer[caller] = std::max(layer[caller], layer[u] + 1);
      if (--remaining[caller] == 0) queue.push_back(caller);
    }
  }

  int depth = 0;
  for (int i = 0; i < n; ++i) depth = std::max(depth, layer[i] + 1);
  order.layers.assign(n == 0 ? 0 : depth, {});
  for (int i = 0; i < n; ++i) order.layers[layer[i]].push_back(i);
  for (auto& bucket : order.layers) std::sort(bucket.begin(), bucket.end());
  return order;
}

}  // namespace cobexplain::depgraph
