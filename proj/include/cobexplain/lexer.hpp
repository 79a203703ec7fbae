#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cobexplain/source.hpp"

namespace cobexplain::cobol {

enum class TokenKind { Word, Literal, Number, Period, Punct };

struct Token {
  TokenKind kind = TokenKind::Word;
  std::string text;  // literals carry their content without quotes
  int line = 0;
};

// A statement-bearing line after continuation joining.
struct LogicalLine {
  int line = 0;  // number of the first physical line
  std::string text;
};

std::string to_upper(std::string_view s);

bool is_cobol_word(std::string_view s);

// Tokenizes program text.  Words are [A-Za-z0-9-]+ runs; a trailing period
// is split off as its own token.  Quoted literals keep their quotes out of
// the token text.
std::vector<Token> tokenize(const std::vector<LogicalLine>& lines);

// Joins continuation lines onto their predecessors and drops comment and
// blank lines.  [first, last] is an inclusive 1-based line range; pass 0, 0
// for the whole file.
std::vector<LogicalLine> logical_lines(const SourceFile& file, int first = 0, int last = 0);

}  // namespace cobexplain::cobol
