#include "cobexplain/lexer.hpp"

#include <algorithm>
#include <cctype>

namespace cobexplain::cobol {

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Drops a free-format inline comment ("*>" to end of line) outside literals.
std::string strip_inline_comment(const std::string& text) {
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '*' && i + 1 < text.size() && text[i + 1] == '>') {
      return text.substr(0, i);
    }
  }
  return text;
}

}  // namespace

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool is_cobol_word(std::string_view s) {
  if (s.empty() || s.front() == '-' || s.back() == '-') return false;
  bool alnum = false;
  for (char c : s) {
    if (!word_char(c)) return false;
    if (std::isalnum(static_cast<unsigned char>(c))) alnum = true;
  }
  return alnum;
}

std::vector<LogicalLine> logical_lines(const SourceFile& file, int first, int last) {
  std::vector<LogicalLine> out;
  for (const auto& line : file.lines) {
    if (first != 0 && line.number < first) continue;
    if (last != 0 && line.number > last) break;
    if (line.kind == LineKind::Comment || line.kind == LineKind::Blank) continue;

    std::string content = line.content;
    if (file.format == SourceFormat::Free) content = strip_inline_comment(content);

    if (line.kind == LineKind::Continuation && !out.empty()) {
      std::size_t i = 0;
      while (i < content.size() && content[i] == ' ') ++i;
      std::string tail = content.substr(i);
      std::string& text = out.back().text;
      // A continuation that reopens a literal drops the reopening quote.
      if (!tail.empty() && (tail[0] == '\'' || tail[0] == '"') &&
          std::count(text.begin(), text.end(), tail[0]) % 2 == 1) {
        tail.erase(0, 1);
      }
      text += tail;
    } else {
      out.push_back(LogicalLine{line.number, content});
    }
  }
  return out;
}

std::vector<Token> tokenize(const std::vector<LogicalLine>& lines) {
  std::vector<Token> tokens;
  for (const auto& line : lines) {
    const std::string& s = line.text;
    std::size_t i = 0;
    while (i < s.size()) {
      char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (c == '\'' || c == '"') {
        char quote = c;
        std::string value;
        ++i;
        while (i < s.size()) {
          if (s[i] == quote) {
            if (i + 1 < s.size() && s[i + 1] == quote) {
              value.push_back(quote);
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          value.push_back(s[i]);
          ++i;
        }
        tokens.push_back(Token{TokenKind::Literal, std::move(value), line.line});
        continue;
      }
      if (word_char(c)) {
        std::size_t start = i;
        while (i < s.size() && word_char(s[i])) ++i;
        // Keep a decimal point inside a numeric token.
        if (i < s.size() && s[i] == '.' && i + 1 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[i + 1])) &&
            all_digits(std::string_view(s).substr(start, i - start))) {
          ++i;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
        std::string text = s.substr(start, i - start);
        TokenKind kind = TokenKind::Word;
        if (std::isdigit(static_cast<unsigned char>(text[0])) &&
            text.find_first_not_of("0123456789.") == std::string::npos) {
          kind = TokenKind::Number;
        }
        tokens.push_back(Token{kind, std::move(text), line.line});
        continue;
      }
      if (c == '.') {
        tokens.push_back(Token{TokenKind::Period, ".", line.line});
        ++i;
        continue;
      }
      tokens.push_back(Token{TokenKind::Punct, std::string(1, c), line.line});
      ++i;
    }
  }
  return tokens;
}

}  // namespace cobexplain::cobol
