#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace oracle {

namespace {

class ProgramBuilder {
 public:
  explicit ProgramBuilder(std::uint32_t seed) : rng_(seed) {}

  SyntheticProgram build() {
    int paragraph_count = pick(3, 10);
    for (int i = 0; i < paragraph_count; ++i) {
      std::ostringstream name;
      name << "STEP-" << i / 10 << i % 10;
      paragraphs_.push_back(name.str());
    }

    // Optional section headers at increasing paragraph boundaries. A section
    // owns every paragraph until the next header or the end of the program.
    int section_count = pick(0, 10) < 4 ? pick(1, 2) : 0;
    std::vector<int> starts;
    for (int i = 0; i < section_count; ++i) {
      starts.push_back(pick(0, paragraph_count - 1));
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    for (std::size_t i = 0; i < starts.size(); ++i) {
      sections_.emplace_back(starts[i], "SEC-" + std::to_string(i));
    }

    for (const auto& name : paragraphs_) result_.nodes.insert(name);
    for (const auto& [start, name] : sections_) {
      (void)start;
      result_.nodes.insert(name);
    }

    emit("IDENTIFICATION DIVISION.");
    emit("PROGRAM-ID. SYNTH.");
    emit("DATA DIVISION.");
    emit("WORKING-STORAGE SECTION.");
    emit("01 WS-A              PIC 9(4) VALUE 0.");
    emit("01 WS-B              PIC 9(4) VALUE 0.");
    emit("01 WS-X              PIC 9 VALUE 1.");
    emit("PROCEDURE DIVISION.");

    std::size_t next_section = 0;
    for (int i = 0; i < paragraph_count; ++i) {
      if (next_section < sections_.size() && sections_[next_section].first == i) {
        const std::string& section = sections_[next_section].second;
        emit(section + " SECTION.");
        int direct = pick(0, 2);
        for (int s = 0; s < direct; ++s) statement(section);
        // Performing a section also runs each member paragraph.
        int end = next_section + 1 < sections_.size() ? sections_[next_section + 1].first
                                                      : paragraph_count;
        for (int member = i; member < end; ++member) {
          result_.edges.emplace(section, paragraphs_[member]);
        }
        ++next_section;
      }
      emit(paragraphs_[i] + ".");
      int body = pick(1, 5);
      for (int s = 0; s < body; ++s) statement(paragraphs_[i]);
    }
    result_.text = buffer_.str();
    return result_;
  }

 private:
  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }

  void emit(const std::string& content) {
    sequence_ += 100;
    char head[16];
    std::snprintf(head, sizeof head, "%06d ", sequence_);
    buffer_ << head << content << "\n";
  }

  void edge(const std::string& caller, const std::string& target) {
    result_.edges.emplace(caller, target);
    if (caller == target) result_.self_loops.insert(caller);
  }

  std::string any_target() {
    // Mostly paragraphs, sometimes a section, occasionally a missing name.
    int roll = pick(0, 9);
    if (roll == 0) return "GHOST-" + std::to_string(pick(0, 4));
    if (roll <= 2 && !sections_.empty()) {
      return sections_[pick(0, static_cast<int>(sections_.size()) - 1)].second;
    }
    return paragraphs_[pick(0, static_cast<int>(paragraphs_.size()) - 1)];
  }

  void call(const std::string& caller, const std::string& target) {
    if (result_.nodes.count(target)) {
      edge(caller, target);
    } else {
      result_.unresolved.emplace_back(caller, target);
    }
  }

  void statement(const std::string& caller) {
    switch (pick(0, 9)) {
      case 0:
      case 1:
      case 2:
        emit("    MOVE " + std::to_string(pick(0, 99)) + " TO WS-A");
        break;
      case 3:
        emit("    ADD 1 TO WS-B");
        break;
      case 4: {
        std::string target = any_target();
        emit("    PERFORM " + target);
        call(caller, target);
        break;
      }
      case 5: {
        std::string target = any_target();
        emit("    PERFORM " + target + " " + std::to_string(pick(2, 9)) + " TIMES");
        call(caller, target);
        break;
      }
      case 6: {
        int a = pick(0, static_cast<int>(paragraphs_.size()) - 1);
        int b = pick(a, static_cast<int>(paragraphs_.size()) - 1);
        emit("    PERFORM " + paragraphs_[a] + " THRU " + paragraphs_[b]);
        for (int i = a; i <= b; ++i) edge(caller, paragraphs_[i]);
        break;
      }
      case 7: {
        std::string target = any_target();
        emit("    GO TO " + target);
        call(caller, target);
        break;
      }
      case 8: {
        std::string one = any_target();
        std::string two = any_target();
        emit("    GO TO " + one + " " + two + " DEPENDING ON WS-X");
        call(caller, one);
        call(caller, two);
        break;
      }
      case 9:
        // Inline loop and a dynamic call: neither produces a function edge.
        if (pick(0, 1) == 0) {
          emit("    PERFORM UNTIL WS-A > 5");
          emit("        ADD 1 TO WS-A");
          emit("    END-PERFORM");
        } else {
          emit("    CALL 'EXTPROG'");
        }
        break;
    }
  }

  std::mt19937 rng_;
  std::ostringstream buffer_;
  int sequence_ = 0;
  std::vector<std::string> paragraphs_;
  std::vector<std::pair<int, std::string>> sections_;
  SyntheticProgram result_;
};

std::map<std::string, int> ngram_counts(const std::string& text, int n) {
  std::map<std::string, int> counts;
  if (static_cast<int>(text.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= text.size(); ++i) {
    ++counts[text.substr(i, n)];
  }
  return counts;
}

std::string strip_spaces(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

}  // namespace

SyntheticProgram make_synthetic_program(std::uint32_t seed) {
  return ProgramBuilder(seed).build();
}

double chrf_oracle(const std::string& hyp, const std::string& ref, int max_n, double beta) {
  std::string h = strip_spaces(hyp);
  std::string r = strip_spaces(ref);

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= max_n; ++n) {
    std::map<std::string, int> ref_counts = ngram_counts(r, n);
    if (ref_counts.empty()) continue;
    std::map<std::string, int> hyp_counts = ngram_counts(h, n);
    long matches = 0;
    long hyp_total = 0;
    long ref_total = 0;
    for (const auto& [gram, count] : hyp_counts) {
      hyp_total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    for (const auto& [gram, count] : ref_counts) ref_total += count;
    precision_sum += hyp_total == 0 ? 0.0 : static_cast<double>(matches) / hyp_total;
    recall_sum += static_cast<double>(matches) / ref_total;
    ++orders;
  }
  if (orders == 0) return 0.0;
  double precision = precision_sum / orders;
  double recall = recall_sum / orders;
  if (precision + recall == 0.0) return 0.0;
  double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

double mwu_exact_oracle(const std::vector<double>& xs, const std::vector<double>& ys) {
  int n = static_cast<int>(xs.size());
  int m = static_cast<int>(ys.size());

  // U statistic by direct pairwise dominance (tie-free input assumed).
  double u = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      if (x > y) u += 1.0;
    }
  }

  // ways[j][u]: number of interleavings of j ys among i xs producing U=u,
  // built by appending either one x (adds j to U) or one y.
  int u_max = n * m;
  std::vector<std::vector<std::vector<double>>> ways(
      n + 1, std::vector<std::vector<double>>(m + 1, std::vector<double>(u_max + 1, 0.0)));
  ways[0][0][0] = 1.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      for (int k = 0; k <= u_max; ++k) {
        double w = ways[i][j][k];
        if (w == 0.0) continue;
        if (i < n && k + j <= u_max) ways[i + 1][j][k + j] += w;
        if (j < m) ways[i][j + 1][k] += w;
      }
    }
  }

  double total = 0.0;
  for (int k = 0; k <= u_max; ++k) total += ways[n][m][k];
  int tail_limit = static_cast<int>(std::floor(std::min(u, u_max - u) + 1e-9));
  double tail = 0.0;
  for (int k = 0; k <= tail_limit; ++k) tail += ways[n][m][k];
  return std::min(1.0, 2.0 * tail / total);
}

std::vector<std::vector<bool>> reachability(int n,
                                            const std::set<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& [from, to] : edges) reach[from][to] = true;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (int j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  return reach;
}

}  // namespace oracle
