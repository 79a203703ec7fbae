#include "cobexplain/json_io.hpp"

#include <sstream>

namespace cobexplain::json_io {

using nlohmann::json;

namespace {

const char* statement_kind_name(cobol::StatementKind kind) {
  switch (kind) {
    case cobol::StatementKind::Perform: return "perform";
    case cobol::StatementKind::PerformThru: return "perform-thru";
    case cobol::StatementKind::GoTo: return "go-to";
    case cobol::StatementKind::CallLiteral: return "call";
    case cobol::StatementKind::CallDynamic: return "call-dynamic";
    case cobol::StatementKind::Link: return "link";
    case cobol::StatementKind::Copy: return "copy";
  }
  return "perform";
}

json statements_json(const std::vector<cobol::StatementRef>& statements) {
  json out = json::array();
  for (const auto& statement : statements) {
    out.push_back(json{
        {"kind", statement_kind_name(statement.kind)},
        {"line", statement.line},
        {"targets", statement.targets},
    });
  }
  return out;
}

json comment_json(const cobol::CommentBlock& block) {
  return json{
      {"end_line", block.end_line},
      {"start_line", block.start_line},
      {"text", block.text},
  };
}

}  // namespace

json program_json(const cobol::Program& program) {
  json data_items = json::array();
  for (const auto& item : program.data_items) {
    json node = {
        {"level", item.level},
        {"line", item.line},
        {"name", item.name},
    };
    if (item.picture) node["picture"] = *item.picture;
    if (item.parent) {
      node["parent_index"] = *item.parent;
      node["parent_name"] = program.data_items[*item.parent].name;
    }
    data_items.push_back(std::move(node));
  }

  json sections = json::array();
  for (const auto& section : program.sections) {
    json node = {
        {"name", section.name},
        {"paragraphs", section.paragraphs},
        {"span", {section.span.first, section.span.second}},
        {"statements", statements_json(section.statements)},
    };
    if (section.leading_comment) node["leading_comment"] = comment_json(*section.leading_comment);
    sections.push_back(std::move(node));
  }

  json paragraphs = json::array();
  for (const auto& paragraph : program.paragraphs) {
    json node = {
        {"name", paragraph.name},
        {"span", {paragraph.span.first, paragraph.span.second}},
        {"statements", statements_json(paragraph.statements)},
    };
    if (paragraph.section) node["section"] = *paragraph.section;
    if (paragraph.leading_comment) {
      node["leading_comment"] = comment_json(*paragraph.leading_comment);
    }
    paragraphs.push_back(std::move(node));
  }

  json out = {
      {"copies", program.copies},
      {"data_items", data_items},
      {"format", program.file.format == cobol::SourceFormat::Fixed ? "fixed" : "free"},
      {"paragraphs", paragraphs},
      {"path", program.file.path},
      {"procedure_division_line", program.procedure_division_line},
      {"sections", sections},
  };
  if (program.program_id) out["program_id"] = *program.program_id;
  if (program.header_comment) out["header_comment"] = comment_json(*program.header_comment);
  return out;
}

json graph_json(const depgraph::DepGraph& graph) {
  depgraph::Condensation condensation = depgraph::condense(graph);
  depgraph::TopoRanking ranking = depgraph::topo_ranks(condensation);
  depgraph::RefinementOrder order = depgraph::refinement_order(graph);

  json edges = json::array();
  for (const auto& [caller, callee] : graph.edges) {
    edges.push_back(json::array({caller, callee}));
  }
  json unresolved = json::array();
  for (const auto& [caller, target] : graph.unresolved) {
    unresolved.push_back(json::array({caller, target}));
  }

  json layers = json::array();
  for (const auto& layer : order.layers) {
    json layer_json = json::array();
    for (int comp_index : layer) {
      layer_json.push_back(order.condensation.components[comp_index].members);
    }
    layers.push_back(std::move(layer_json));
  }

  return json{
      {"edges", edges},
      {"kind", graph.kind == depgraph::GraphKind::Function ? "function" : "file"},
      {"layers", layers},
      {"nodes", graph.nodes},
      {"ranks", ranking.rank},
      {"self_loops", graph.self_loops},
      {"unresolved", unresolved},
  };
}

std::string graph_dot(const depgraph::DepGraph& graph) {
  std::ostringstream out;
  out << "digraph deps {\n";
  for (const auto& node : graph.nodes) {
    out << "  \"" << node << "\";\n";
  }
  for (const auto& [caller, callee] : graph.edges) {
    out << "  \"" << caller << "\" -> \"" << callee << "\";\n";
  }
  for (const auto& node : graph.self_loops) {
    out << "  \"" << node << "\" -> \"" << node << "\";\n";
  }
  out << "}\n";
  return out.str();
}

json corpus_report_json(const artifacts::CorpusReport& report) {
  return json{
      {"accepted", report.accepted},
      {"cobol_files", report.cobol_files},
      {"cobol_line_pct", report.cobol_line_pct},
      {"project", report.project},
      {"reasons", report.reasons},
  };
}

json reference_pair_json(const artifacts::ReferencePair& pair) {
  return json{
      {"level", pipeline::level_name(pair.level)},
      {"origin", pair.origin},
      {"reference_text", pair.reference_text},
      {"unit_id", pair.unit_id},
  };
}

}  // namespace cobexplain::json_io
