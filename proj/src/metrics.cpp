#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "cobexplain/errors.hpp"
#include "cobexplain/eval.hpp"

namespace cobexplain::eval {

const char* metric_name(Metric metric) {
  switch (metric) {
    case Metric::Chrf: return "chrf";
    case Metric::MeteorLite: return "meteor";
    case Metric::Cosine: return "cosine";
  }
  return "chrf";
}

namespace {

std::string strip_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::map<std::string, int> ngram_counts(const std::string& text, int n) {
  std::map<std::string, int> counts;
  if (static_cast<int>(text.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= text.size(); ++i) {
    ++counts[text.substr(i, n)];
  }
  return counts;
}

}  // namespace

SimilarityScore chrf(const std::string& hyp, const std::string& ref, int max_n, double beta) {
  std::string h = strip_whitespace(hyp);
  std::string r = strip_whitespace(ref);
  if (r.empty()) throw EmptyReferenceError("chrf reference is empty");

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= max_n; ++n) {
    std::map<std::string, int> ref_counts = ngram_counts(r, n);
    if (ref_counts.empty()) continue;
    std::map<std::string, int> hyp_counts = ngram_counts(h, n);

    std::int64_t matches = 0;
    std::int64_t hyp_total = 0;
    std::int64_t ref_total = 0;
    for (const auto& [gram, count] : hyp_counts) {
      hyp_total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    for (const auto& [gram, count] : ref_counts) {
      (void)gram;
      ref_total += count;
    }

    precision_sum += hyp_total == 0 ? 0.0 : static_cast<double>(matches) / hyp_total;
    recall_sum += static_cast<double>(matches) / ref_total;
    ++orders;
  }

  SimilarityScore score;
  score.metric = Metric::Chrf;
  if (orders == 0) return score;
  double precision = precision_sum / orders;
  double recall = recall_sum / orders;
  if (precision + recall == 0.0) return score;
  double b2 = beta * beta;
  score.value = (1.0 + b2) * precision * recall / (b2 * precision + recall);
  return score;
}

namespace {

std::vector<std::string> lower_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(token);
  }
  return tokens;
}

// Strips one suffix from the list (longest first), keeping stems of at
// least three characters.
std::string stem(const std::string& token) {
  static const std::vector<std::string> suffixes = {"ing", "ed", "ly", "es", "s"};
  for (const auto& suffix : suffixes) {
    if (token.size() > suffix.size() && token.size() - suffix.size() >= 3 &&
        token.compare(token.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return token.substr(0, token.size() - suffix.size());
    }
  }
  return token;
}

}  // namespace

SimilarityScore meteor_lite(const std::string& hyp, const std::string& ref, double alpha,
                            double beta, double gamma) {
  std::vector<std::string> h = lower_tokens(hyp);
  std::vector<std::string> r = lower_tokens(ref);
  if (r.empty()) throw EmptyReferenceError("meteor reference is empty");

  SimilarityScore score;
  score.metric = Metric::MeteorLite;
  if (h.empty()) return score;

  std::vector<int> hyp_match(h.size(), -1);  // hyp index -> ref index
  std::vector<bool> ref_used(r.size(), false);

  auto run_stage = [&](auto&& key) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (hyp_match[i] != -1) continue;
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (ref_used[j]) continue;
        if (key(h[i]) == key(r[j])) {
          hyp_match[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  };
  run_stage([](const std::string& t) { return t; });
  run_stage([](const std::string& t) { return stem(t); });

  int m = 0;
  for (int j : hyp_match) {
    if (j != -1) ++m;
  }
  if (m == 0) return score;

  double precision = static_cast<double>(m) / h.size();
  double recall = static_cast<double>(m) / r.size();
  double fmean = precision * recall / (alpha * precision + (1.0 - alpha) * recall);

  // Chunks: maximal runs of matches contiguous and in order on both sides.
  int chunks = 0;
  int prev_ref = -2;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (hyp_match[i] == -1) {
      prev_ref = -2;
      continue;
    }
    if (hyp_match[i] != prev_ref + 1) ++chunks;
    prev_ref = hyp_match[i];
  }

  double penalty = gamma * std::pow(static_cast<double>(chunks) / m, beta);
  score.value = fmean * (1.0 - penalty);
  return score;
}

SimilarityScore cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatchError("vectors have dimensions " + std::to_string(a.size()) +
                                 " and " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVectorError("cosine of a zero vector is undefined");

  SimilarityScore score;
  score.metric = Metric::Cosine;
  score.value = dot / (std::sqrt(na) * std::sqrt(nb));
  return score;
}

// ---------------------------------------------------------------------------
// Manual coverage scale

const char* coverage_aspect_name(CoverageAspect aspect) {
  return aspect == CoverageAspect::ReferenceCoverage ? "reference-coverage" : "hallucination";
}

double coverage_scale(double value) {
  static const double scale[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (double allowed : scale) {
    if (value == allowed) return value;
  }
  throw ScaleError("coverage value " + std::to_string(value) +
                   " is not one of 0, 0.25, 0.5, 0.75, 1");
}

CoverageScore make_coverage(std::string unit_id, double value, CoverageAspect aspect) {
  CoverageScore score;
  score.unit_id = std::move(unit_id);
  score.value = coverage_scale(value);
  score.aspect = aspect;
  return score;
}

}  // namespace cobexplain::eval
