#pragma once

#include <string>
#include <vector>

namespace cobexplain::pipeline {

enum class Level { Function, File, Project };
enum class Status { Preliminary, Final };

struct Explanation {
  std::string unit_id;
  Level level = Level::Function;
  Status status = Status::Preliminary;
  std::string text;
  int word_count = 0;
  // Cache keys of the completions that produced this text, in request order.
  std::vector<std::string> sources;
};

int count_words(const std::string& text);

// Builds an explanation with word_count derived from text.
Explanation make_explanation(std::string unit_id, Level level, Status status, std::string text,
                             std::vector<std::string> sources);

const char* level_name(Level level);
const char* status_name(Status status);

}  // namespace cobexplain::pipeline
