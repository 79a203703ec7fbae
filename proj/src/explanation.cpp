#include "cobexplain/explanation.hpp"

#include <sstream>

namespace cobexplain::pipeline {

int count_words(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int count = 0;
  while (in >> word) ++count;
  return count;
}

Explanation make_explanation(std::string unit_id, Level level, Status status, std::string text,
                             std::vector<std::string> sources) {
  Explanation explanation;
  explanation.unit_id = std::move(unit_id);
  explanation.level = level;
  explanation.status = status;
  explanation.word_count = count_words(text);
  explanation.text = std::move(text);
  explanation.sources = std::move(sources);
  return explanation;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::Function: return "Function";
    case Level::File: return "File";
    case Level::Project: return "Project";
  }
  return "Function";
}

const char* status_name(Status status) {
  return status == Status::Preliminary ? "Preliminary" : "Final";
}

}  // namespace cobexplain::pipeline
