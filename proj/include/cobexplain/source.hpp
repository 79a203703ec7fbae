#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cobexplain::cobol {

enum class SourceFormat { Fixed, Free };
enum class FormatHint { Auto, Fixed, Free };
enum class LineKind { Code, Comment, Continuation, Blank };

// One physical line, split per the reference format of the file.  For fixed
// format: columns 1-6 sequence area, column 7 indicator, 8-72 content,
// 73+ ignored.  For free format the whole line is content and the sequence
// area is empty.
struct SourceLine {
  int number = 0;  // 1-based
  std::string sequence;
  char indicator = ' ';
  std::string content;
  LineKind kind = LineKind::Blank;
};

struct SourceFile {
  std::string path;
  std::vector<SourceLine> lines;
  SourceFormat format = SourceFormat::Fixed;
  // Bytes that were not valid UTF-8 and were replaced with '?'.
  std::int64_t replaced_bytes = 0;
};

// A maximal run of adjacent comment lines.  text holds the comment content
// with sequence and indicator columns stripped, one line per source line.
struct CommentBlock {
  int start_line = 0;
  int end_line = 0;
  std::string text;
};

SourceFile read_source_text(std::string_view text, std::string path,
                            FormatHint hint = FormatHint::Auto);
SourceFile read_source_file(const std::filesystem::path& path,
                            FormatHint hint = FormatHint::Auto);

std::vector<CommentBlock> comment_blocks(const SourceFile& file);

}  // namespace cobexplain::cobol
