#include "cobexplain/program.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "cobexplain/errors.hpp"

namespace cobexplain::cobol {

namespace {

const Token* peek(const std::vector<Token>& tokens, std::size_t i) {
  return i < tokens.size() ? &tokens[i] : nullptr;
}

bool is_inline_perform_word(const std::string& upper) {
  return upper == "UNTIL" || upper == "VARYING" || upper == "TIMES" || upper == "WITH" ||
         upper == "END" || upper.rfind("END-", 0) == 0;
}

std::size_t find_word(const std::vector<Token>& tokens, std::size_t from, std::size_t to,
                      const std::string& upper) {
  for (std::size_t i = from; i < to; ++i) {
    if (tokens[i].kind == TokenKind::Word && to_upper(tokens[i].text) == upper) return i;
  }
  return to;
}

// Position of the first non-space character, or npos for an empty line.
std::size_t indent_of(const std::string& text) {
  return text.find_first_not_of(' ');
}

// Removes everything up to and including the first sentence period outside
// literals; used to drop a paragraph header from its own line.
std::string strip_first_sentence(const std::string& text) {
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '.') {
      return text.substr(i + 1);
    }
  }
  return std::string();
}

struct Sentence {
  int line = 0;
  std::vector<std::string> fields;
};

// Splits a line range into sentences of whitespace-delimited fields.  A
// period ends a sentence only when it is outside literals and followed by
// whitespace or end of line, which keeps edit pictures like ZZ9.99 whole.
std::vector<Sentence> sentences(const std::vector<LogicalLine>& lines) {
  std::vector<Sentence> out;
  Sentence current;
  std::string field;
  char quote = 0;
  auto flush_field = [&]() {
    if (field.empty()) return;
    if (current.fields.empty() && current.line == 0) current.line = 0;
    current.fields.push_back(field);
    field.clear();
  };
  auto flush_sentence = [&]() {
    flush_field();
    if (!current.fields.empty()) out.push_back(current);
    current = Sentence{};
  };
  for (const auto& line : lines) {
    const std::string& s = line.text;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      if (quote != 0) {
        field.push_back(c);
        if (c == quote) quote = 0;
        continue;
      }
      if (c == '\'' || c == '"') {
        quote = c;
        field.push_back(c);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        flush_field();
        continue;
      }
      if (c == '.' && (i + 1 >= s.size() || s[i + 1] == ' ')) {
        flush_sentence();
        continue;
      }
      if (current.fields.empty() && field.empty() && current.line == 0) current.line = line.line;
      field.push_back(c);
    }
    flush_field();
  }
  flush_sentence();
  return out;
}

bool is_level_number(const std::string& field, int& level) {
  if (field.empty() || field.size() > 2) return false;
  if (!std::all_of(field.begin(), field.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    return false;
  }
  level = std::stoi(field);
  return (level >= 1 && level <= 49) || level == 66 || level == 77 || level == 88;
}

const char* kDataClauseWords[] = {"PIC",     "PICTURE", "VALUE", "VALUES", "OCCURS",
                                 "USAGE",   "COMP",    "COMP-1", "COMP-2", "COMP-3",
                                 "REDEFINES", "RENAMES", "SIGN",  "SYNC",   "JUSTIFIED",
                                 "JUST",    "BLANK",   "EXTERNAL", "GLOBAL", "BINARY",
                                 "PACKED-DECIMAL", "DISPLAY", "INDEXED"};

bool is_data_clause_word(const std::string& upper) {
  for (const char* w : kDataClauseWords) {
    if (upper == w) return true;
  }
  return false;
}

std::vector<DataItem> parse_data_items(const SourceFile& file, int first, int last) {
  std::vector<DataItem> items;
  std::vector<std::pair<int, std::size_t>> stack;  // (level, index)
  for (const auto& sentence : sentences(logical_lines(file, first, last))) {
    int level = 0;
    if (sentence.fields.empty() || !is_level_number(sentence.fields[0], level)) continue;
    DataItem item;
    item.level = level;
    item.line = sentence.line;
    item.name = "FILLER";
    std::size_t next = 1;
    if (sentence.fields.size() > 1) {
      std::string upper = to_upper(sentence.fields[1]);
      if (!is_data_clause_word(upper) && is_cobol_word(sentence.fields[1])) {
        item.name = sentence.fields[1];
        next = 2;
      }
    }
    for (std::size_t i = next; i < sentence.fields.size(); ++i) {
      std::string upper = to_upper(sentence.fields[i]);
      if (upper == "PIC" || upper == "PICTURE") {
        std::size_t p = i + 1;
        if (p < sentence.fields.size() && to_upper(sentence.fields[p]) == "IS") ++p;
        if (p < sentence.fields.size()) item.picture = sentence.fields[p];
        break;
      }
    }

    std::size_t index = items.size();
    if (level == 1 || level == 77) {
      stack.clear();
    } else if (level == 66) {
      if (!stack.empty() && stack.front().first == 1) item.parent = stack.front().second;
      items.push_back(item);
      continue;
    } else {
      while (!stack.empty() && stack.back().first >= level) stack.pop_back();
      if (!stack.empty()) item.parent = stack.back().second;
    }
    stack.emplace_back(level, index);
    items.push_back(item);
  }
  return items;
}

struct DivisionIndex {
  int identification = 0;
  int environment = 0;
  int data = 0;
  int procedure = 0;
};

DivisionIndex find_divisions(const std::vector<LogicalLine>& lines) {
  DivisionIndex idx;
  for (const auto& line : lines) {
    std::vector<Token> tokens = tokenize({line});
    if (tokens.size() < 2 || tokens[0].kind != TokenKind::Word ||
        tokens[1].kind != TokenKind::Word) {
      continue;
    }
    if (to_upper(tokens[1].text) != "DIVISION") continue;
    std::string head = to_upper(tokens[0].text);
    if ((head == "IDENTIFICATION" || head == "ID") && idx.identification == 0) {
      idx.identification = line.line;
    } else if (head == "ENVIRONMENT" && idx.environment == 0) {
      idx.environment = line.line;
    } else if (head == "DATA" && idx.data == 0) {
      idx.data = line.line;
    } else if (head == "PROCEDURE" && idx.procedure == 0) {
      idx.procedure = line.line;
    }
  }
  return idx;
}

struct UnitHeader {
  bool is_section = false;
  std::string name;
  int line = 0;
};

std::optional<UnitHeader> match_unit_header(const LogicalLine& line) {
  std::size_t indent = indent_of(line.text);
  if (indent == std::string::npos || indent > 3) return std::nullopt;
  std::vector<Token> tokens = tokenize({line});
  if (tokens.empty() || tokens[0].kind != TokenKind::Word || !is_cobol_word(tokens[0].text)) {
    return std::nullopt;
  }
  UnitHeader header;
  header.name = tokens[0].text;
  header.line = line.line;
  if (tokens.size() >= 2 && tokens[1].kind == TokenKind::Period) {
    return header;
  }
  if (tokens.size() >= 3 && tokens[1].kind == TokenKind::Word &&
      to_upper(tokens[1].text) == "SECTION" && tokens[2].kind == TokenKind::Period) {
    header.is_section = true;
    return header;
  }
  return std::nullopt;
}

int last_code_line(const SourceFile& file, int first, int last) {
  int found = first;
  for (const auto& line : file.lines) {
    if (line.number < first || line.number > last) continue;
    if (line.kind == LineKind::Code || line.kind == LineKind::Continuation) found = line.number;
  }
  return found;
}

std::vector<StatementRef> scan_span(const SourceFile& file, int first, int last) {
  std::vector<LogicalLine> lines = logical_lines(file, first, last);
  if (!lines.empty() && lines.front().line == first) {
    lines.front().text = strip_first_sentence(lines.front().text);
    if (lines.front().text.find_first_not_of(' ') == std::string::npos) {
      lines.erase(lines.begin());
    }
  }
  return scan_statements(lines);
}

std::optional<CommentBlock> block_ending_at(const std::vector<CommentBlock>& blocks, int line) {
  for (const auto& block : blocks) {
    if (block.end_line == line) return block;
  }
  return std::nullopt;
}

std::optional<CommentBlock> leading_comment_for(const SourceFile& file,
                                                const std::vector<CommentBlock>& blocks,
                                                int header_line, int allowance) {
  int k = header_line - 1;
  int blanks = 0;
  while (k >= 1) {
    const SourceLine& line = file.lines[static_cast<std::size_t>(k) - 1];
    if (line.kind == LineKind::Comment) return block_ending_at(blocks, k);
    if (line.kind == LineKind::Blank && blanks < allowance) {
      ++blanks;
      --k;
      continue;
    }
    break;
  }
  return std::nullopt;
}

}  // namespace

std::vector<StatementRef> scan_statements(const std::vector<LogicalLine>& lines) {
  std::vector<StatementRef> refs;
  std::vector<Token> tokens = tokenize(lines);
  std::size_t i = 0;
  while (i < tokens.size()) {
    const Token& tok = tokens[i];
    if (tok.kind != TokenKind::Word) {
      ++i;
      continue;
    }
    std::string verb = to_upper(tok.text);
    if (verb == "PERFORM") {
      const Token* next = peek(tokens, i + 1);
      if (next == nullptr || next->kind == TokenKind::Number ||
          (next->kind == TokenKind::Word && is_inline_perform_word(to_upper(next->text)))) {
        ++i;
        continue;
      }
      if (next->kind != TokenKind::Word) {
        ++i;
        continue;
      }
      const Token* after = peek(tokens, i + 2);
      if (after != nullptr && after->kind == TokenKind::Word &&
          (to_upper(after->text) == "THRU" || to_upper(after->text) == "THROUGH")) {
        const Token* stop = peek(tokens, i + 3);
        if (stop != nullptr && stop->kind == TokenKind::Word) {
          refs.push_back(
              StatementRef{StatementKind::PerformThru, {next->text, stop->text}, tok.line});
          i += 4;
          continue;
        }
      }
      refs.push_back(StatementRef{StatementKind::Perform, {next->text}, tok.line});
      i += 2;
      continue;
    }
    if (verb == "GO") {
      std::size_t j = i + 1;
      const Token* next = peek(tokens, j);
      if (next != nullptr && next->kind == TokenKind::Word && to_upper(next->text) == "TO") ++j;
      std::size_t first = j;
      auto ends_run = [](const std::string& word) {
        // A statement verb cannot be a GO TO target; it starts the next
        // statement when sentences are not period-terminated.
        return word == "DEPENDING" || word == "GO" || word == "PERFORM" ||
               word == "CALL" || word == "EXEC" || word == "COPY";
      };
      while (j < tokens.size() && tokens[j].kind == TokenKind::Word &&
             !ends_run(to_upper(tokens[j].text))) {
        ++j;
      }
      bool depending = j < tokens.size() && tokens[j].kind == TokenKind::Word &&
                       to_upper(tokens[j].text) == "DEPENDING";
      if (depending) {
        // GO TO A B ... DEPENDING ON X names every listed paragraph.
        for (std::size_t k = first; k < j; ++k) {
          refs.push_back(StatementRef{StatementKind::GoTo, {tokens[k].text}, tok.line});
        }
        i = j;
      } else {
        // The plain form has exactly one target; later words belong to
        // whatever statement follows.
        if (first < j) {
          refs.push_back(StatementRef{StatementKind::GoTo, {tokens[first].text}, tok.line});
          i = first + 1;
        } else {
          i = j;
        }
      }
      continue;
    }
    if (verb == "CALL") {
      const Token* next = peek(tokens, i + 1);
      if (next != nullptr && next->kind == TokenKind::Literal) {
        refs.push_back(StatementRef{StatementKind::CallLiteral, {next->text}, tok.line});
        i += 2;
        continue;
      }
      if (next != nullptr && next->kind == TokenKind::Word) {
        refs.push_back(StatementRef{StatementKind::CallDynamic, {next->text}, tok.line});
        i += 2;
        continue;
      }
      ++i;
      continue;
    }
    if (verb == "EXEC") {
      std::size_t end = find_word(tokens, i + 1, tokens.size(), "END-EXEC");
      const Token* next = peek(tokens, i + 1);
      if (next != nullptr && next->kind == TokenKind::Word && to_upper(next->text) == "CICS") {
        std::size_t link = find_word(tokens, i + 2, end, "LINK");
        if (link < end) {
          std::size_t prog = find_word(tokens, link + 1, end, "PROGRAM");
          if (prog + 2 < end && tokens[prog + 1].kind == TokenKind::Punct &&
              tokens[prog + 1].text == "(" && tokens[prog + 2].kind == TokenKind::Literal) {
            refs.push_back(
                StatementRef{StatementKind::Link, {tokens[prog + 2].text}, tok.line});
          }
        }
      }
      i = end < tokens.size() ? end + 1 : end;
      continue;
    }
    if (verb == "COPY") {
      const Token* next = peek(tokens, i + 1);
      if (next != nullptr &&
          (next->kind == TokenKind::Word || next->kind == TokenKind::Literal)) {
        refs.push_back(StatementRef{StatementKind::Copy, {next->text}, tok.line});
        i += 2;
        continue;
      }
      ++i;
      continue;
    }
    ++i;
  }
  return refs;
}

Program parse_program(const SourceFile& file, const ParseOptions& options) {
  Program program;
  program.file = file;

  std::vector<LogicalLine> all_lines = logical_lines(file);
  DivisionIndex divisions = find_divisions(all_lines);
  if (divisions.procedure == 0) {
    throw ParseError(ParseError::Code::NoProcedureDivision,
                     file.path + ": no PROCEDURE DIVISION found");
  }
  program.procedure_division_line = divisions.procedure;

  // PROGRAM-ID: exactly one compilation unit is supported.
  {
    std::vector<Token> tokens = tokenize(all_lines);
    std::vector<std::pair<std::string, int>> ids;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].kind != TokenKind::Word || to_upper(tokens[i].text) != "PROGRAM-ID") continue;
      std::size_t j = i + 1;
      if (j < tokens.size() && tokens[j].kind == TokenKind::Period) ++j;
      if (j < tokens.size() &&
          (tokens[j].kind == TokenKind::Word || tokens[j].kind == TokenKind::Literal)) {
        ids.emplace_back(tokens[j].text, tokens[j].line);
      }
    }
    if (ids.size() > 1) {
      throw ParseError(ParseError::Code::MultipleProgramIds,
                       file.path + ": multiple PROGRAM-ID clauses at lines " +
                           std::to_string(ids[0].second) + " and " +
                           std::to_string(ids[1].second));
    }
    if (!ids.empty()) program.program_id = ids[0].first;
  }

  std::vector<CommentBlock> blocks = comment_blocks(file);

  // Header comment: the first block before the IDENTIFICATION DIVISION
  // header or within its first five lines.
  {
    int id_line = divisions.identification;
    for (const auto& block : blocks) {
      bool match = id_line > 0 ? block.start_line <= id_line + 5 : block.start_line <= 5;
      if (match) {
        program.header_comment = block;
        break;
      }
      if (id_line > 0 && block.start_line > id_line + 5) break;
    }
  }

  if (divisions.data > 0) {
    program.data_items = parse_data_items(file, divisions.data + 1, divisions.procedure - 1);
  }

  // COPY statements can appear in any division.
  for (const auto& ref : scan_statements(all_lines)) {
    if (ref.kind != StatementKind::Copy) continue;
    std::string upper = to_upper(ref.targets[0]);
    bool seen = std::any_of(program.copies.begin(), program.copies.end(),
                            [&](const std::string& c) { return to_upper(c) == upper; });
    if (!seen) program.copies.push_back(ref.targets[0]);
  }

  // Unit headers in the PROCEDURE DIVISION.
  std::vector<UnitHeader> headers;
  int file_end = file.lines.empty() ? divisions.procedure : file.lines.back().number;
  for (const auto& line : logical_lines(file, divisions.procedure + 1, 0)) {
    if (auto header = match_unit_header(line)) headers.push_back(*header);
  }

  std::map<std::string, int> seen_names;
  for (const auto& header : headers) {
    std::string key = to_upper(header.name);
    auto [it, inserted] = seen_names.emplace(key, header.line);
    if (!inserted) {
      throw ParseError(ParseError::Code::DuplicateParagraph,
                       file.path + ": duplicate paragraph '" + header.name + "' at lines " +
                           std::to_string(it->second) + " and " + std::to_string(header.line));
    }
  }

  for (std::size_t h = 0; h < headers.size(); ++h) {
    const UnitHeader& header = headers[h];
    int region_end = h + 1 < headers.size() ? headers[h + 1].line - 1 : file_end;
    int span_end = last_code_line(file, header.line, region_end);
    if (header.is_section) {
      Section section;
      section.name = header.name;
      section.span = {header.line, span_end};
      section.leading_comment =
          leading_comment_for(file, blocks, header.line, options.comment_blank_allowance);
      program.sections.push_back(std::move(section));
    } else {
      Paragraph paragraph;
      paragraph.name = header.name;
      paragraph.span = {header.line, span_end};
      paragraph.statements = scan_span(file, header.line, span_end);
      paragraph.leading_comment =
          leading_comment_for(file, blocks, header.line, options.comment_blank_allowance);
      if (!program.sections.empty()) {
        Section& owner = program.sections.back();
        paragraph.section = owner.name;
        owner.paragraphs.push_back(paragraph.name);
      }
      program.paragraphs.push_back(std::move(paragraph));
    }
  }

  // Section extents and direct statements.
  for (auto& section : program.sections) {
    int section_end = section.span.second;
    int direct_end = 0;
    int first_member_line = 0;
    for (const auto& paragraph : program.paragraphs) {
      if (paragraph.section && to_upper(*paragraph.section) == to_upper(section.name)) {
        section_end = std::max(section_end, paragraph.span.second);
        if (first_member_line == 0 || paragraph.span.first < first_member_line) {
          first_member_line = paragraph.span.first;
        }
      }
    }
    if (first_member_line == 0) {
      direct_end = section.span.second;
    } else if (first_member_line > section.span.first) {
      direct_end = last_code_line(program.file, section.span.first, first_member_line - 1);
    }
    if (direct_end > section.span.first ||
        (direct_end == section.span.first && first_member_line == 0)) {
      section.direct_end = direct_end;
      section.statements = scan_span(program.file, section.span.first, direct_end);
    }
    section.span.second = section_end;
  }

  return program;
}

}  // namespace cobexplain::cobol
