#pragma once

#include <string>

#include "cobexplain/artifacts.hpp"
#include "cobexplain/depgraph.hpp"
#include "cobexplain/program.hpp"
#include "nlohmann/json.hpp"

namespace cobexplain::json_io {

nlohmann::json program_json(const cobol::Program& program);

// Nodes, edges, unresolved targets, self-loops, topological ranks, and the
// refinement layers (each layer a list of component member lists).
nlohmann::json graph_json(const depgraph::DepGraph& graph);

std::string graph_dot(const depgraph::DepGraph& graph);

nlohmann::json corpus_report_json(const artifacts::CorpusReport& report);

nlohmann::json reference_pair_json(const artifacts::ReferencePair& pair);

}  // namespace cobexplain::json_io
