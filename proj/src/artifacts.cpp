#include "cobexplain/artifacts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "cobexplain/errors.hpp"

namespace cobexplain::artifacts {

namespace fs = std::filesystem;
using cobol::LineKind;
using cobol::Program;
using cobol::SourceFile;
using cobol::StatementKind;
using cobol::StatementRef;
using cobol::to_upper;

namespace {

std::string span_text(const SourceFile& file, int first, int last) {
  std::string out;
  for (const auto& line : file.lines) {
    if (line.number < first || line.number > last) continue;
    if (!out.empty()) out.push_back('\n');
    out += line.content;
  }
  return out;
}

struct UnitIndex {
  const cobol::Paragraph* paragraph = nullptr;
  const cobol::Section* section = nullptr;

  const std::string& name() const {
    return paragraph != nullptr ? paragraph->name : section->name;
  }
};

std::map<std::string, UnitIndex> index_units(const Program& program) {
  std::map<std::string, UnitIndex> units;
  for (const auto& paragraph : program.paragraphs) {
    units[to_upper(paragraph.name)].paragraph = &paragraph;
  }
  for (const auto& section : program.sections) {
    units[to_upper(section.name)].section = &section;
  }
  return units;
}

// Position of a paragraph in source order, or npos.
std::size_t paragraph_position(const Program& program, const std::string& upper_name) {
  for (std::size_t i = 0; i < program.paragraphs.size(); ++i) {
    if (to_upper(program.paragraphs[i].name) == upper_name) return i;
  }
  return std::string::npos;
}

class TargetCollector {
 public:
  explicit TargetCollector(const Program& program)
      : program_(program), units_(index_units(program)) {}

  void add(const std::string& target) {
    std::string upper = to_upper(target);
    auto it = units_.find(upper);
    if (it == units_.end()) {
      push(unresolved_, target);
    } else {
      push(called_, it->second.name());
    }
  }

  void add_thru(const std::string& from, const std::string& to) {
    std::size_t a = paragraph_position(program_, to_upper(from));
    std::size_t b = paragraph_position(program_, to_upper(to));
    if (a != std::string::npos && b != std::string::npos && a <= b) {
      for (std::size_t i = a; i <= b; ++i) push(called_, program_.paragraphs[i].name);
      return;
    }
    add(from);
    add(to);
  }

  void add_statements(const std::vector<StatementRef>& statements) {
    for (const auto& ref : statements) {
      switch (ref.kind) {
        case StatementKind::Perform:
        case StatementKind::GoTo:
          add(ref.targets[0]);
          break;
        case StatementKind::PerformThru:
          add_thru(ref.targets[0], ref.targets[1]);
          break;
        default:
          break;
      }
    }
  }

  std::vector<std::string> called() && { return std::move(called_); }
  std::vector<std::string> unresolved() && { return std::move(unresolved_); }

 private:
  void push(std::vector<std::string>& into, const std::string& name) {
    std::string upper = to_upper(name);
    for (const auto& existing : into) {
      if (to_upper(existing) == upper) return;
    }
    into.push_back(name);
  }

  const Program& program_;
  std::map<std::string, UnitIndex> units_;
  std::vector<std::string> called_;
  std::vector<std::string> unresolved_;
};

std::vector<std::string> line_split(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool matches_any(const std::string& line, const std::vector<std::regex>& patterns) {
  for (const auto& pattern : patterns) {
    if (std::regex_search(line, pattern)) return true;
  }
  return false;
}

std::string comment_origin(const SourceFile& file, const cobol::CommentBlock& block) {
  return file.path + ":" + std::to_string(block.start_line) + "-" +
         std::to_string(block.end_line);
}

const std::set<std::string>& cobol_extensions() {
  static const std::set<std::string> exts = {".cbl", ".cob", ".cobol", ".cpy"};
  return exts;
}

const std::map<std::string, std::vector<std::string>>& other_extensions() {
  static const std::map<std::string, std::vector<std::string>> exts = {
      {".jcl", {"//*"}},
      {".sql", {"--"}},
      {".sh", {"#"}},
      {".py", {"#"}},
      {".java", {"//", "/*", "*"}},
      {".c", {"//", "/*", "*"}},
      {".h", {"//", "/*", "*"}},
      {".js", {"//", "/*", "*"}},
      {".ts", {"//", "/*", "*"}},
      {".go", {"//", "/*", "*"}},
      {".rs", {"//", "/*", "*"}},
  };
  return exts;
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::int64_t count_cobol_lines(const fs::path& path) {
  SourceFile file = cobol::read_source_file(path);
  std::int64_t count = 0;
  for (const auto& line : file.lines) {
    if (line.kind == LineKind::Code || line.kind == LineKind::Continuation) ++count;
  }
  return count;
}

std::int64_t count_other_lines(const fs::path& path, const std::vector<std::string>& prefixes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::int64_t count = 0;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    std::string_view body = std::string_view(line).substr(start);
    bool comment = false;
    for (const auto& prefix : prefixes) {
      if (body.substr(0, prefix.size()) == prefix) {
        comment = true;
        break;
      }
    }
    if (!comment) ++count;
  }
  return count;
}

}  // namespace

std::string normalize_whitespace(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> function_units(const Program& program) {
  std::vector<std::string> names;
  for (const auto& paragraph : program.paragraphs) names.push_back(paragraph.name);
  for (const auto& section : program.sections) names.push_back(section.name);
  std::sort(names.begin(), names.end(),
            [](const std::string& a, const std::string& b) { return to_upper(a) < to_upper(b); });
  return names;
}

FunctionArtifacts function_artifacts(const Program& program, const std::string& name) {
  auto units = index_units(program);
  auto it = units.find(to_upper(name));
  if (it == units.end()) {
    throw NotFoundError(program.file.path + ": no paragraph or section named '" + name + "'");
  }

  FunctionArtifacts artifacts;
  TargetCollector collector(program);
  int span_first = 0;
  int span_last = 0;
  if (it->second.paragraph != nullptr) {
    const cobol::Paragraph& paragraph = *it->second.paragraph;
    artifacts.function_name = paragraph.name;
    span_first = paragraph.span.first;
    span_last = paragraph.span.second;
    collector.add_statements(paragraph.statements);
  } else {
    const cobol::Section& section = *it->second.section;
    artifacts.function_name = section.name;
    span_first = section.span.first;
    span_last = section.direct_end > 0 ? section.direct_end : section.span.first;
    collector.add_statements(section.statements);
    for (const auto& member : section.paragraphs) collector.add(member);
  }
  artifacts.source = span_text(program.file, span_first, span_last);
  artifacts.called_functions = std::move(collector).called();
  artifacts.unresolved = std::move(collector).unresolved();

  // Declared data items referenced as whole tokens in the unit body.
  std::vector<cobol::Token> tokens =
      cobol::tokenize(cobol::logical_lines(program.file, span_first, span_last));
  std::set<std::string> used;
  for (const auto& token : tokens) {
    if (token.kind == cobol::TokenKind::Word) used.insert(to_upper(token.text));
  }
  std::set<std::string> added;
  for (const auto& item : program.data_items) {
    std::string upper = to_upper(item.name);
    if (upper == "FILLER" || !used.count(upper) || added.count(upper)) continue;
    added.insert(upper);
    artifacts.variables.emplace_back(item.name, item.picture.value_or(""));
  }
  return artifacts;
}

FileArtifacts file_artifacts(const Program& program, const std::string& file_name) {
  FileArtifacts artifacts;
  artifacts.file_name = file_name;
  artifacts.program_id = program.program_id.value_or("");
  int last = program.file.lines.empty() ? program.procedure_division_line
                                        : program.file.lines.back().number;
  artifacts.source = span_text(program.file, program.procedure_division_line, last);
  artifacts.variables = program.data_items;
  for (const auto& unit : function_units(program)) {
    FunctionArtifacts fn = function_artifacts(program, unit);
    for (const auto& callee : fn.called_functions) {
      artifacts.function_dependencies.emplace_back(fn.function_name, callee);
    }
  }
  return artifacts;
}

std::vector<ReferencePair> extract_function_references(const Program& program) {
  std::vector<ReferencePair> pairs;
  for (const auto& paragraph : program.paragraphs) {
    if (!paragraph.leading_comment) continue;
    std::string text = normalize_whitespace(paragraph.leading_comment->text);
    if (text.empty()) continue;
    pairs.push_back(ReferencePair{pipeline::Level::Function, paragraph.name, text,
                                  comment_origin(program.file, *paragraph.leading_comment)});
  }
  return pairs;
}

const std::vector<std::string>& default_header_cleanup_patterns() {
  static const std::vector<std::string> patterns = {
      R"(copyright|\(c\)\s*[0-9]{4}|all rights reserved)",
      R"(^\s*authors?\s*[:.]|written by)",
      R"(^\s*date\s*[:.]|\brevisions?\b|\bversion\s*[:.0-9]|change history|\bmodified\b)",
  };
  return patterns;
}

std::optional<ReferencePair> extract_file_reference(
    const Program& program, const std::vector<std::string>& cleanup_patterns) {
  if (!program.header_comment) return std::nullopt;

  std::vector<std::regex> compiled;
  compiled.reserve(cleanup_patterns.size());
  for (const auto& pattern : cleanup_patterns) {
    compiled.emplace_back(pattern, std::regex::icase);
  }

  std::string kept;
  for (const auto& line : line_split(program.header_comment->text)) {
    if (matches_any(line, compiled)) continue;
    if (!kept.empty()) kept.push_back('\n');
    kept += line;
  }
  std::string text = normalize_whitespace(kept);
  if (text.empty()) return std::nullopt;

  std::string unit = fs::path(program.file.path).filename().string();
  return ReferencePair{pipeline::Level::File, unit, text,
                       comment_origin(program.file, *program.header_comment)};
}

std::optional<ReferencePair> extract_file_reference(const Program& program) {
  return extract_file_reference(program, default_header_cleanup_patterns());
}

std::optional<ReferencePair> extract_project_reference(const std::string& readme_text,
                                                       const std::string& project_name,
                                                       const std::string& origin) {
  static const std::regex heading(R"(^(#{1,6})\s*(.*)$)");
  static const std::regex skip_words(
      R"(install|setup|build|prerequisite|requirement|dependenc|license|licence|contribut)",
      std::regex::icase);

  std::string kept;
  bool in_fence = false;
  int skip_below_level = 0;
  for (const auto& line : line_split(readme_text)) {
    std::string_view body = line;
    std::size_t start = body.find_first_not_of(" \t");
    bool fence = start != std::string_view::npos && body.substr(start, 3) == "```";
    if (fence) {
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) continue;

    std::smatch match;
    if (std::regex_match(line, match, heading)) {
      int level = static_cast<int>(match[1].length());
      if (skip_below_level != 0 && level <= skip_below_level) skip_below_level = 0;
      if (skip_below_level == 0 && std::regex_search(match[2].str(), skip_words)) {
        skip_below_level = level;
      }
      if (skip_below_level != 0) continue;
      if (!kept.empty()) kept.push_back('\n');
      kept += match[2].str();
      continue;
    }
    if (skip_below_level != 0) continue;
    if (!kept.empty()) kept.push_back('\n');
    kept += line;
  }

  std::string text = normalize_whitespace(kept);
  if (text.empty()) return std::nullopt;
  return ReferencePair{pipeline::Level::Project, project_name, text, origin};
}

CorpusReport corpus_filter(const fs::path& root, const CorpusFilterOptions& options) {
  if (!fs::exists(root) || !fs::is_directory(root)) {
    throw IoError("not a directory: " + root.string());
  }

  CorpusReport report;
  report.project = root.string();
  std::int64_t cobol_lines = 0;
  std::int64_t other_lines = 0;

  for (auto it = fs::recursive_directory_iterator(root);
       it != fs::recursive_directory_iterator(); ++it) {
    const fs::directory_entry& entry = *it;
    std::string name = entry.path().filename().string();
    if (!name.empty() && name.front() == '.') {
      if (entry.is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file()) continue;
    std::string ext = lower_extension(entry.path());
    if (cobol_extensions().count(ext)) {
      ++report.cobol_files;
      cobol_lines += count_cobol_lines(entry.path());
    } else if (auto found = other_extensions().find(ext); found != other_extensions().end()) {
      other_lines += count_other_lines(entry.path(), found->second);
    }
  }

  std::int64_t total = cobol_lines + other_lines;
  report.cobol_line_pct =
      total == 0 ? 0.0 : static_cast<double>(cobol_lines) * 100.0 / static_cast<double>(total);
  bool enough_files = report.cobol_files >= options.min_cobol_files;
  bool enough_share = report.cobol_line_pct >= options.min_cobol_line_pct;
  report.accepted = enough_files && enough_share;
  if (!enough_files) {
    report.reasons.push_back("fewer than two COBOL source files");
  }
  if (!enough_share) {
    std::ostringstream reason;
    reason << "COBOL line share " << report.cobol_line_pct << "% below "
           << options.min_cobol_line_pct << "%";
    report.reasons.push_back(reason.str());
  }
  return report;
}

}  // namespace cobexplain::artifacts
