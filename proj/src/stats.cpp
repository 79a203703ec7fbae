#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "cobexplain/errors.hpp"
#include "cobexplain/eval.hpp"

namespace cobexplain::eval {

const char* stat_test_name(StatTest test) {
  switch (test) {
    case StatTest::MannWhitneyU: return "mwu";
    case StatTest::CliffsDelta: return "cliffs";
    case StatTest::CohensKappa: return "kappa";
  }
  return "mwu";
}

namespace detail {

// P(U = u) table by the standard recurrence N(n,m,u) = N(n-1,m,u-m) + N(n,m-1,u).
double mwu_exact_two_sided(std::size_t n, std::size_t m, double u) {
  std::size_t u_max = n * m;
  // counts[i][j][u] built iteratively; counts fit a double exactly for
  // n, m <= 20 (max C(40,20) ~ 1.4e11 < 2^53).
  std::vector<std::vector<std::vector<double>>> counts(
      n + 1, std::vector<std::vector<double>>(m + 1, std::vector<double>(u_max + 1, 0.0)));
  for (std::size_t j = 0; j <= m; ++j) counts[0][j][0] = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    counts[i][0][0] = 1.0;
    for (std::size_t j = 1; j <= m; ++j) {
      for (std::size_t k = 0; k <= i * j; ++k) {
        double ways = counts[i][j - 1][k];
        if (k >= j) ways += counts[i - 1][j][k - j];
        counts[i][j][k] = ways;
      }
    }
  }

  double total = 0.0;
  for (std::size_t k = 0; k <= u_max; ++k) total += counts[n][m][k];

  double tail_stat = std::min(u, static_cast<double>(u_max) - u);
  std::size_t cutoff = static_cast<std::size_t>(std::floor(tail_stat + 1e-9));
  double tail = 0.0;
  for (std::size_t k = 0; k <= cutoff && k <= u_max; ++k) tail += counts[n][m][k];
  return std::min(1.0, 2.0 * tail / total);
}

double mwu_approx_two_sided(const std::vector<double>& xs, const std::vector<double>& ys,
                            double u) {
  double n = static_cast<double>(xs.size());
  double m = static_cast<double>(ys.size());
  double big_n = n + m;

  std::map<double, int> tie_groups;
  for (double v : xs) ++tie_groups[v];
  for (double v : ys) ++tie_groups[v];
  double tie_sum = 0.0;
  for (const auto& [value, count] : tie_groups) {
    (void)value;
    double t = count;
    tie_sum += t * t * t - t;
  }

  double mu = n * m / 2.0;
  double variance = n * m / 12.0 * ((big_n + 1.0) - tie_sum / (big_n * (big_n - 1.0)));
  if (variance <= 0.0) return 1.0;

  double z = std::max(std::fabs(u - mu) - 0.5, 0.0) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace detail

namespace {

// Average ranks over the pooled sample, 1-based.
std::vector<double> average_ranks(const std::vector<double>& pooled) {
  std::vector<std::size_t> order(pooled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });

  std::vector<double> ranks(pooled.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

bool has_ties(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> pooled = xs;
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  std::sort(pooled.begin(), pooled.end());
  return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

}  // namespace

StatResult mann_whitney_u(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || ys.empty()) {
    throw EmptySampleError("mann_whitney_u requires two non-empty samples");
  }

  std::vector<double> pooled = xs;
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  std::vector<double> ranks = average_ranks(pooled);

  double rank_sum_x = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) rank_sum_x += ranks[i];
  double n = static_cast<double>(xs.size());
  double u = rank_sum_x - n * (n + 1.0) / 2.0;

  StatResult result;
  result.test = StatTest::MannWhitneyU;
  result.statistic = u;
  bool tied = has_ties(xs, ys);
  if (!tied && std::max(xs.size(), ys.size()) <= 20) {
    result.exact = true;
    result.p_value = detail::mwu_exact_two_sided(xs.size(), ys.size(), u);
  } else {
    result.exact = false;
    result.p_value = detail::mwu_approx_two_sided(xs, ys, u);
  }
  return result;
}

StatResult cliffs_delta(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || ys.empty()) {
    throw EmptySampleError("cliffs_delta requires two non-empty samples");
  }
  std::int64_t greater = 0;
  std::int64_t less = 0;
  for (double x : xs) {
    for (double y : ys) {
      if (x > y) ++greater;
      if (x < y) ++less;
    }
  }
  double delta = static_cast<double>(greater - less) /
                 (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));

  StatResult result;
  result.test = StatTest::CliffsDelta;
  result.statistic = delta;
  double magnitude = std::fabs(delta);
  if (magnitude < 0.147) {
    result.effect = "negligible";
  } else if (magnitude < 0.33) {
    result.effect = "small";
  } else if (magnitude < 0.474) {
    result.effect = "medium";
  } else {
    result.effect = "large";
  }
  return result;
}

StatResult cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) {
    throw LengthMismatchError("cohens_kappa rating lists have lengths " +
                              std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.empty()) throw EmptySampleError("cohens_kappa requires at least one rating");

  double n = static_cast<double>(a.size());
  double agree = 0.0;
  std::map<std::string, double> count_a;
  std::map<std::string, double> count_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    ++count_a[a[i]];
    ++count_b[b[i]];
  }

  double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, count] : count_a) {
    auto it = count_b.find(label);
    if (it != count_b.end()) p_e += (count / n) * (it->second / n);
  }

  StatResult result;
  result.test = StatTest::CohensKappa;
  // p_e = 1 forces both raters onto one shared label, hence p_o = 1; treat
  // that degenerate full agreement as kappa 1.
  result.statistic = p_e == 1.0 ? 1.0 : (p_o - p_e) / (1.0 - p_e);
  return result;
}

std::string significance_code(double p) {
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  if (p <= 0.1) return ".";
  return " ";
}

const char* significance_legend() {
  return "Signif. codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1";
}

}  // namespace cobexplain::eval
