#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cobexplain/lexer.hpp"
#include "cobexplain/source.hpp"

namespace cobexplain::cobol {

enum class StatementKind { Perform, PerformThru, GoTo, CallLiteral, CallDynamic, Link, Copy };

struct StatementRef {
  StatementKind kind = StatementKind::Perform;
  std::vector<std::string> targets;
  int line = 0;
};

struct DataItem {
  int level = 0;
  std::string name;  // "FILLER" when unnamed
  std::optional<std::string> picture;
  std::optional<std::size_t> parent;  // index into Program::data_items
  int line = 0;
};

struct Paragraph {
  std::string name;
  std::optional<std::string> section;
  std::pair<int, int> span{0, 0};  // inclusive line numbers
  std::vector<StatementRef> statements;
  std::optional<CommentBlock> leading_comment;
};

// A PROCEDURE DIVISION section.  Statements placed directly under the
// section header (before its first paragraph) belong to the section itself.
struct Section {
  std::string name;
  std::pair<int, int> span{0, 0};
  int direct_end = 0;  // last line of the section's own statements, 0 if none
  std::vector<StatementRef> statements;
  std::vector<std::string> paragraphs;  // member names in source order
  std::optional<CommentBlock> leading_comment;
};

struct Program {
  std::optional<std::string> program_id;
  SourceFile file;
  std::vector<DataItem> data_items;
  std::vector<Section> sections;
  std::vector<Paragraph> paragraphs;
  std::vector<std::string> copies;
  std::optional<CommentBlock> header_comment;
  int procedure_division_line = 0;
};

struct ParseOptions {
  // Blank lines tolerated between a comment block and the paragraph header
  // it documents.
  int comment_blank_allowance = 0;
};

Program parse_program(const SourceFile& file, const ParseOptions& options = {});

// Scans already-joined statement lines for control transfers.  Keywords are
// matched case-insensitively; anything unrecognized is skipped.
std::vector<StatementRef> scan_statements(const std::vector<LogicalLine>& lines);

}  // namespace cobexplain::cobol
