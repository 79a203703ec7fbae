#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobexplain/agents.hpp"
#include "cobexplain/explanation.hpp"

namespace cobexplain::eval {

// ---------------------------------------------------------------------------
// Text similarity

enum class Metric { Chrf, MeteorLite, Cosine };

const char* metric_name(Metric metric);

struct SimilarityScore {
  Metric metric = Metric::Chrf;
  double value = 0.0;
  std::string hyp_id;
  std::string ref_id;
};

// Character n-gram F-score over whitespace-stripped text.  Precision and
// recall are averaged over the orders 1..max_n for which the reference has
// at least one n-gram.
SimilarityScore chrf(const std::string& hyp, const std::string& ref, int max_n = 6,
                     double beta = 2.0);

// Unigram alignment metric: exact then suffix-stemmed matching stages, a
// precision/recall mean weighted by alpha, and a fragmentation penalty
// gamma * (chunks/matches)^beta.  Synonym lookups are out of scope.
SimilarityScore meteor_lite(const std::string& hyp, const std::string& ref, double alpha = 0.9,
                            double beta = 3.0, double gamma = 0.5);

SimilarityScore cosine(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Embeddings

class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual std::vector<double> embed(const std::string& key) = 0;
};

// Vectors loaded from a JSONL file whose lines carry {"vector": [...]} plus
// an "id" or "text" field used as the lookup key.
class PrecomputedEmbeddings : public EmbeddingSource {
 public:
  explicit PrecomputedEmbeddings(const std::filesystem::path& file);
  std::vector<double> embed(const std::string& key) override;
  std::size_t size() const { return vectors_.size(); }

 private:
  std::map<std::string, std::vector<double>> vectors_;
};

// POSTs {base_url}/embeddings with {model, input} and reads
// data[0].embedding; same retry policy as the chat backend.
class RemoteEmbedder : public EmbeddingSource {
 public:
  explicit RemoteEmbedder(agents::RemoteEndpoint endpoint, int max_attempts = 3,
                          int base_delay_ms = 250);
  std::vector<double> embed(const std::string& key) override;

 private:
  agents::RemoteEndpoint endpoint_;
  int max_attempts_;
  int base_delay_ms_;
};

// ---------------------------------------------------------------------------
// Statistics

enum class StatTest { MannWhitneyU, CliffsDelta, CohensKappa };

const char* stat_test_name(StatTest test);

struct StatResult {
  StatTest test = StatTest::MannWhitneyU;
  double statistic = 0.0;              // U, delta, or kappa
  std::optional<double> p_value;       // Mann-Whitney only
  std::optional<std::string> effect;   // Cliff's delta label
  bool exact = false;                  // Mann-Whitney: exact enumeration used
};

// Two-sided Mann-Whitney U.  Exact p by enumerating the rank-sum
// distribution when max(|xs|,|ys|) <= 20 and there are no ties; otherwise a
// normal approximation with tie and continuity corrections.
StatResult mann_whitney_u(const std::vector<double>& xs, const std::vector<double>& ys);

// delta = (#{x>y} - #{x<y}) / (|xs|*|ys|), labeled negligible/small/medium/
// large at the 0.147/0.33/0.474 thresholds.
StatResult cliffs_delta(const std::vector<double>& xs, const std::vector<double>& ys);

StatResult cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

// R-style stars for a p-value, and the matching legend line.
std::string significance_code(double p);
const char* significance_legend();

namespace detail {

// Exact two-sided p for integer U with no ties.
double mwu_exact_two_sided(std::size_t n, std::size_t m, double u);

// Normal approximation with tie correction; u computed from xs ranks.
double mwu_approx_two_sided(const std::vector<double>& xs, const std::vector<double>& ys,
                            double u);

}  // namespace detail

// ---------------------------------------------------------------------------
// Manual coverage scale

enum class CoverageAspect { ReferenceCoverage, Hallucination };

const char* coverage_aspect_name(CoverageAspect aspect);

struct CoverageScore {
  std::string unit_id;
  double value = 0.0;
  CoverageAspect aspect = CoverageAspect::ReferenceCoverage;
};

// Validates a human annotation value against the five-point scale
// {0, 0.25, 0.5, 0.75, 1}; anything else raises ScaleError.
double coverage_scale(double value);

CoverageScore make_coverage(std::string unit_id, double value, CoverageAspect aspect);

// ---------------------------------------------------------------------------
// LLM-as-a-judge protocol

struct JudgePair {
  std::string pair_id;
  std::string reference;
  std::string ours;
  std::string theirs;
};

struct JudgeVerdict {
  std::string pair_id;
  std::map<std::string, int> criterion_scores;
  std::optional<agents::Winner> winner;  // in prompt frame (A/B)
  std::string ours_was;                  // "A" or "B": which side held our text
  std::optional<bool> conceptually_similar;
  std::optional<std::string> error;  // parse failure, recorded instead of thrown

  // De-blinded outcome: "Ours", "Theirs", or "Tie".
  std::string winner_label() const;
};

// Scoring criteria per level; project pairs get winner + similarity only.
std::vector<std::string> criteria_for(pipeline::Level level);

// The blinded prompt: reference plus the two candidates as ExplanationA/B.
// Side identity stays out of the prompt by construction.
agents::CompletionRequest judge_request(const agents::TemplateSet& templates,
                                        const std::string& reference, const std::string& text_a,
                                        const std::string& text_b, pipeline::Level level);

// ours_is_a fixes the presentation order for this pair.
JudgeVerdict judge_pairwise(agents::AgentClient& client, const agents::TemplateSet& templates,
                            const JudgePair& pair, pipeline::Level level, bool ours_is_a);

// Blinds each pair with one coin flip from a seeded generator, drawn in
// sorted pair-id order so runs with the same seed agree; parse failures are
// recorded on the verdict and the batch continues.
std::vector<JudgeVerdict> judge_batch(agents::AgentClient& client,
                                      const agents::TemplateSet& templates,
                                      const std::vector<JudgePair>& pairs, pipeline::Level level,
                                      std::uint32_t seed);

}  // namespace cobexplain::eval
