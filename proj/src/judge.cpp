#include <algorithm>
#include <random>

#include "cobexplain/errors.hpp"
#include "cobexplain/eval.hpp"

namespace cobexplain::eval {

std::string JudgeVerdict::winner_label() const {
  if (!winner) return "";
  if (*winner == agents::Winner::Tie) return "Tie";
  bool ours_won = (*winner == agents::Winner::A) == (ours_was == "A");
  return ours_won ? "Ours" : "Theirs";
}

std::vector<std::string> criteria_for(pipeline::Level level) {
  switch (level) {
    case pipeline::Level::Function: return {"Clarity", "Conciseness", "Correctness"};
    case pipeline::Level::File: return {"Purpose", "Functionality", "Clarity"};
    case pipeline::Level::Project: return {};
  }
  return {};
}

agents::CompletionRequest judge_request(const agents::TemplateSet& templates,
                                        const std::string& reference, const std::string& text_a,
                                        const std::string& text_b, pipeline::Level level) {
  const agents::PromptTemplate& tmpl = templates.get(
      level == pipeline::Level::Project ? "judge_project" : "judge_pair");
  agents::Bindings bindings;
  bindings.emplace_back("Reference", reference);
  bindings.emplace_back("ExplanationA", text_a);
  bindings.emplace_back("ExplanationB", text_b);

  std::map<std::string, std::string> substitutions;
  std::vector<std::string> criteria = criteria_for(level);
  std::string joined;
  for (const auto& criterion : criteria) {
    if (!joined.empty()) joined += ", ";
    joined += criterion;
  }
  substitutions.emplace("criteria", joined);

  agents::CompletionRequest request;
  request.role = tmpl.role;
  request.system_text = tmpl.system_text;
  request.user_text = agents::render_prompt(tmpl, bindings, substitutions);
  return request;
}

JudgeVerdict judge_pairwise(agents::AgentClient& client, const agents::TemplateSet& templates,
                            const JudgePair& pair, pipeline::Level level, bool ours_is_a) {
  JudgeVerdict verdict;
  verdict.pair_id = pair.pair_id;
  verdict.ours_was = ours_is_a ? "A" : "B";

  const std::string& text_a = ours_is_a ? pair.ours : pair.theirs;
  const std::string& text_b = ours_is_a ? pair.theirs : pair.ours;
  agents::CompletionRequest request =
      judge_request(templates, pair.reference, text_a, text_b, level);
  agents::CompletionResponse response = client.complete(request, pair.pair_id);

  agents::JudgeScores scores = agents::judge_score_parse(response.text, criteria_for(level));
  verdict.criterion_scores = scores.criterion_scores;
  verdict.winner = scores.winner;
  verdict.conceptually_similar = scores.conceptually_similar;
  return verdict;
}

std::vector<JudgeVerdict> judge_batch(agents::AgentClient& client,
                                      const agents::TemplateSet& templates,
                                      const std::vector<JudgePair>& pairs, pipeline::Level level,
                                      std::uint32_t seed) {
  std::vector<const JudgePair*> ordered;
  ordered.reserve(pairs.size());
  for (const auto& pair : pairs) ordered.push_back(&pair);
  std::sort(ordered.begin(), ordered.end(),
            [](const JudgePair* a, const JudgePair* b) { return a->pair_id < b->pair_id; });

  std::mt19937 rng(seed);
  std::vector<JudgeVerdict> verdicts;
  verdicts.reserve(ordered.size());
  for (const JudgePair* pair : ordered) {
    bool ours_is_a = (rng() & 1u) == 0;
    try {
      verdicts.push_back(judge_pairwise(client, templates, *pair, level, ours_is_a));
    } catch (const JudgeParseError& e) {
      JudgeVerdict failed;
      failed.pair_id = pair->pair_id;
      failed.ours_was = ours_is_a ? "A" : "B";
      failed.error = e.what();
      verdicts.push_back(std::move(failed));
    }
  }
  return verdicts;
}

}  // namespace cobexplain::eval
