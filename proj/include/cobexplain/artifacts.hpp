#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cobexplain/explanation.hpp"
#include "cobexplain/program.hpp"

namespace cobexplain::artifacts {

// Everything the code agent needs to explain one paragraph or section.
struct FunctionArtifacts {
  std::string function_name;
  std::string source;
  std::vector<std::pair<std::string, std::string>> variables;  // (name, picture)
  std::vector<std::string> called_functions;
  std::vector<std::string> unresolved;
};

struct FileArtifacts {
  std::string file_name;
  std::string program_id;
  std::string source;  // PROCEDURE DIVISION text
  std::vector<cobol::DataItem> variables;
  std::map<std::string, pipeline::Explanation> function_explanations;
  std::vector<std::pair<std::string, std::string>> function_dependencies;
};

struct ProjectArtifacts {
  std::string project_name;
  std::vector<std::pair<std::string, std::string>> file_dependencies;
  std::map<std::string, std::string> program_ids;  // file -> PROGRAM-ID
  std::map<std::string, pipeline::Explanation> file_explanations;
  std::map<std::string, int> topo_ranks;
};

struct ReferencePair {
  pipeline::Level level = pipeline::Level::Function;
  std::string unit_id;
  std::string reference_text;
  std::string origin;
};

struct CorpusReport {
  std::string project;
  int cobol_files = 0;
  double cobol_line_pct = 0.0;
  bool accepted = false;
  std::vector<std::string> reasons;
};

struct CorpusFilterOptions {
  int min_cobol_files = 2;
  double min_cobol_line_pct = 80.0;
};

// Resolves the named paragraph or section.  THRU references expand to the
// source-order paragraph range; section targets stand for the section's own
// statements plus its member paragraphs.
FunctionArtifacts function_artifacts(const cobol::Program& program, const std::string& name);

// All function units of a program (paragraphs plus sections), sorted.
std::vector<std::string> function_units(const cobol::Program& program);

FileArtifacts file_artifacts(const cobol::Program& program, const std::string& file_name);

std::vector<ReferencePair> extract_function_references(const cobol::Program& program);

std::optional<ReferencePair> extract_file_reference(
    const cobol::Program& program, const std::vector<std::string>& cleanup_patterns);
std::optional<ReferencePair> extract_file_reference(const cobol::Program& program);

const std::vector<std::string>& default_header_cleanup_patterns();

// Markdown README ingestion for project-level references: drops fenced code
// blocks and sections whose headings look like setup or installation notes.
std::optional<ReferencePair> extract_project_reference(const std::string& readme_text,
                                                       const std::string& project_name,
                                                       const std::string& origin);

CorpusReport corpus_filter(const std::filesystem::path& root,
                           const CorpusFilterOptions& options = {});

std::string normalize_whitespace(const std::string& text);

}  // namespace cobexplain::artifacts
