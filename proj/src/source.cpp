#include "cobexplain/source.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cobexplain/errors.hpp"

namespace cobexplain::cobol {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string_view ltrimmed(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

// Replaces bytes that do not form valid UTF-8 sequences with '?'.
std::string sanitize_utf8(std::string_view in, std::int64_t& replaced) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    unsigned char c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      if ((static_cast<unsigned char>(in[i + k]) & 0xC0) != 0x80) ok = false;
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out.push_back('?');
      ++replaced;
      ++i;
    }
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    std::string line(text.substr(start, nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

// True when the first six columns could be a fixed-format sequence area:
// all spaces or a (space padded) line number.
bool plausible_sequence_area(std::string_view line) {
  std::string_view seq = line.substr(0, std::min<std::size_t>(6, line.size()));
  bool digits = false;
  for (char ch : seq) {
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits = true;
    } else if (ch != ' ') {
      return false;
    }
  }
  (void)digits;
  return true;
}

SourceFormat detect_format(const std::vector<std::string>& lines) {
  std::size_t nonblank = 0;
  std::size_t implausible = 0;
  for (const auto& line : lines) {
    if (is_blank(line)) continue;
    ++nonblank;
    if (!plausible_sequence_area(line)) ++implausible;
  }
  if (nonblank == 0) return SourceFormat::Fixed;
  return implausible * 10 >= nonblank * 9 ? SourceFormat::Free : SourceFormat::Fixed;
}

SourceLine split_fixed(int number, const std::string& raw) {
  SourceLine line;
  line.number = number;
  line.sequence = raw.substr(0, std::min<std::size_t>(6, raw.size()));
  line.indicator = raw.size() > 6 ? raw[6] : ' ';
  line.content = raw.size() > 7 ? raw.substr(7, 65) : std::string();
  if (line.indicator == '*' || line.indicator == '/') {
    line.kind = LineKind::Comment;
  } else if (line.indicator == '-') {
    line.kind = LineKind::Continuation;
  } else if (is_blank(line.content)) {
    line.kind = LineKind::Blank;
  } else {
    line.kind = LineKind::Code;
  }
  return line;
}

SourceLine split_free(int number, const std::string& raw) {
  SourceLine line;
  line.number = number;
  line.content = raw;
  std::string_view body = ltrimmed(raw);
  if (body.empty()) {
    line.kind = LineKind::Blank;
  } else if (body.substr(0, 2) == "*>") {
    line.kind = LineKind::Comment;
  } else {
    line.kind = LineKind::Code;
  }
  return line;
}

}  // namespace

SourceFile read_source_text(std::string_view text, std::string path, FormatHint hint) {
  SourceFile file;
  file.path = std::move(path);
  std::string clean = sanitize_utf8(text, file.replaced_bytes);
  std::vector<std::string> raw_lines = split_lines(clean);

  switch (hint) {
    case FormatHint::Fixed: file.format = SourceFormat::Fixed; break;
    case FormatHint::Free: file.format = SourceFormat::Free; break;
    case FormatHint::Auto: file.format = detect_format(raw_lines); break;
  }

  file.lines.reserve(raw_lines.size());
  for (std::size_t i = 0; i < raw_lines.size(); ++i) {
    int number = static_cast<int>(i) + 1;
    file.lines.push_back(file.format == SourceFormat::Fixed ? split_fixed(number, raw_lines[i])
                                                            : split_free(number, raw_lines[i]));
  }
  return file;
}

SourceFile read_source_file(const std::filesystem::path& path, FormatHint hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_source_text(buf.str(), path.string(), hint);
}

std::vector<CommentBlock> comment_blocks(const SourceFile& file) {
  std::vector<CommentBlock> blocks;
  std::string text;
  int start = 0;
  int last = 0;
  auto flush = [&]() {
    if (start == 0) return;
    blocks.push_back(CommentBlock{start, last, text});
    start = 0;
    text.clear();
  };
  for (const auto& line : file.lines) {
    if (line.kind == LineKind::Comment) {
      if (start == 0) {
        start = line.number;
      } else if (line.number != last + 1) {
        flush();
        start = line.number;
      }
      std::string content = line.content;
      if (file.format == SourceFormat::Free) {
        std::string_view body = ltrimmed(content);
        content.assign(body.substr(2));
      }
      if (!text.empty()) text.push_back('\n');
      text += content;
      last = line.number;
    } else {
      flush();
    }
  }
  flush();
  return blocks;
}

}  // namespace cobexplain::cobol
