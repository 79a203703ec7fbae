#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

// Independent reference implementations used to check the library. Each one is
// written directly from the definition it checks, not from the library code.
namespace oracle {

struct SyntheticProgram {
  std::string text;
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
  std::vector<std::pair<std::string, std::string>> unresolved;
  std::set<std::string> self_loops;
};

// Emits a random fixed-format COBOL program together with the call edges it
// was built to contain.
SyntheticProgram make_synthetic_program(std::uint32_t seed);

// Brute-force character n-gram F-score: counts n-grams in maps, clips, and
// averages precision/recall over orders where the reference has n-grams.
double chrf_oracle(const std::string& hyp, const std::string& ref, int max_n = 6,
                   double beta = 2.0);

// Exact two-sided Mann-Whitney p for tie-free samples, from the count of rank
// configurations per U value (recurrence over adding one observation at a time).
double mwu_exact_oracle(const std::vector<double>& xs, const std::vector<double>& ys);

// Floyd-Warshall reachability closure over nodes 0..n-1.
std::vector<std::vector<bool>> reachability(int n,
                                            const std::set<std::pair<int, int>>& edges);

}  // namespace oracle
