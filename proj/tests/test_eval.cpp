#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cobexplain/agents.hpp"
#include "cobexplain/errors.hpp"
#include "cobexplain/eval.hpp"
#include "support/oracles.hpp"

using namespace cobexplain;
namespace fs = std::filesystem;

namespace {

std::string random_ascii(std::mt19937& rng, int min_len, int max_len) {
  static const char alphabet[] = "abcdefghij klmnop qrs";
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> pick(0, sizeof(alphabet) - 2);
  std::string out;
  int n = len(rng);
  for (int i = 0; i < n; ++i) out += alphabet[pick(rng)];
  return out;
}

}  // namespace

TEST_CASE("chrf is one on identical text and zero on disjoint alphabets") {
  std::mt19937 rng(99);
  for (int i = 0; i < 100; ++i) {
    std::string x = random_ascii(rng, 1, 60);
    if (x.find_first_not_of(' ') == std::string::npos) x += 'q';
    CHECK(eval::chrf(x, x).value == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(eval::chrf("aaaa", "zzzz").value == 0.0);
}

TEST_CASE("chrf matches the naive counting oracle on random pairs") {
  std::mt19937 rng(100);
  for (int i = 0; i < 50; ++i) {
    std::string hyp = random_ascii(rng, 0, 50);
    std::string ref = random_ascii(rng, 1, 50);
    if (ref.find_first_not_of(' ') == std::string::npos) ref += 'k';
    double got = eval::chrf(hyp, ref).value;
    double want = oracle::chrf_oracle(hyp, ref, 6, 2.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("chrf strips whitespace before counting") {
  CHECK(eval::chrf("a b c", "abc").value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval::chrf("ab\ncd", "ab cd").value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chrf rejects an empty reference") {
  CHECK_THROWS_AS(eval::chrf("text", ""), EmptyReferenceError);
  CHECK_THROWS_AS(eval::chrf("text", "   \n "), EmptyReferenceError);
}

TEST_CASE("meteor reproduces the worked examples") {
  std::string ten = "one two three four five six seven eight nine ten";
  CHECK(eval::meteor_lite(ten, ten).value == doctest::Approx(0.9995).epsilon(1e-12));
  CHECK(eval::meteor_lite("alpha beta", "gamma delta").value == 0.0);
  CHECK(eval::meteor_lite("the cat", "cat the").value ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("meteor stems plural suffixes in its second stage") {
  double plain = eval::meteor_lite("record", "records").value;
  CHECK(plain > 0.0);
  double none = eval::meteor_lite("record", "payment").value;
  CHECK(none == 0.0);
}

TEST_CASE("meteor is case-insensitive and rejects an empty reference") {
  CHECK(eval::meteor_lite("The Cat", "the cat").value ==
        eval::meteor_lite("the cat", "the cat").value);
  CHECK_THROWS_AS(eval::meteor_lite("x", ""), EmptyReferenceError);
}

TEST_CASE("cosine matches the hand-computed value") {
  auto score = eval::cosine({1, 2, 3}, {4, 5, 6});
  CHECK(score.value == doctest::Approx(0.974631846).epsilon(1e-6));
  CHECK(eval::cosine({2, 0}, {2, 0}).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval::cosine({1, 0}, {0, 3}).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cosine rejects zero vectors and mismatched dimensions") {
  CHECK_THROWS_AS(eval::cosine({0, 0}, {1, 2}), ZeroVectorError);
  CHECK_THROWS_AS(eval::cosine({1, 2}, {0, 0}), ZeroVectorError);
  CHECK_THROWS_AS(eval::cosine({1, 2}, {1, 2, 3}), DimensionMismatchError);
}

TEST_CASE("precomputed embeddings load by id or text key") {
  fs::path file = fs::temp_directory_path() / "cobexplain-vectors.jsonl";
  {
    std::ofstream out(file);
    out << R"({"id": "u1", "vector": [1.0, 0.0]})" << "\n";
    out << R"({"text": "hello world", "vector": [0.0, 2.0]})" << "\n";
  }
  eval::PrecomputedEmbeddings source(file);
  CHECK(source.size() == 2);
  CHECK(source.embed("u1") == std::vector<double>{1.0, 0.0});
  CHECK(source.embed("hello world") == std::vector<double>{0.0, 2.0});
  CHECK_THROWS_AS(source.embed("missing"), NotFoundError);
  CHECK_THROWS_AS(eval::PrecomputedEmbeddings("/no/such/file.jsonl"), IoError);
}

TEST_CASE("remote embedder reads the first embedding from the reply") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    nlohmann::json reply = {
        {"data", nlohmann::json::array({{{"embedding", {0.5, -0.5, 1.0}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  agents::RemoteEndpoint endpoint;
  endpoint.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  endpoint.model = "embed-model";
  endpoint.api_key_env = "";
  eval::RemoteEmbedder embedder(endpoint, 2, 1);
  CHECK(embedder.embed("some text") == std::vector<double>{0.5, -0.5, 1.0});
  CHECK(hits.load() == 1);

  server.stop();
  runner.join();
}

TEST_CASE("the spaced sample gives the exact two-sided p of one tenth") {
  auto result = eval::mann_whitney_u({1, 2, 3}, {4, 5, 6});
  CHECK(result.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(result.exact);
  REQUIRE(result.p_value.has_value());
  CHECK(*result.p_value == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("identical samples are maximally insignificant") {
  auto result = eval::mann_whitney_u({2, 4, 9}, {2, 4, 9});
  REQUIRE(result.p_value.has_value());
  CHECK(*result.p_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ties push the test onto the approximate path") {
  std::vector<double> xs = {1, 2, 2, 3};
  std::vector<double> ys = {2, 3, 4, 5};
  auto result = eval::mann_whitney_u(xs, ys);
  CHECK(!result.exact);
  REQUIRE(result.p_value.has_value());
  CHECK(*result.p_value > 0.0);
  CHECK(*result.p_value <= 1.0);
}

TEST_CASE("large samples use the approximation and stay near the exact answer") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> xs, ys;
    std::set<double> used;
    auto draw = [&]() {
      double v;
      do { v = uni(rng); } while (!used.insert(v).second);
      return v;
    };
    for (int i = 0; i < 21; ++i) xs.push_back(draw());
    for (int i = 0; i < 21; ++i) ys.push_back(draw() + (trial % 3 == 0 ? 0.3 : 0.0));
    auto result = eval::mann_whitney_u(xs, ys);
    CHECK(!result.exact);
    double want = oracle::mwu_exact_oracle(xs, ys);
    CHECK(*result.p_value == doctest::Approx(want).epsilon(0.02).scale(1.0));
  }
}

TEST_CASE("exact path agrees with the enumeration oracle on small samples") {
  std::mt19937 rng(2025);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> xs, ys;
    std::set<double> used;
    auto draw = [&]() {
      double v;
      do { v = uni(rng); } while (!used.insert(v).second);
      return v;
    };
    int n = 2 + trial % 6, m = 2 + (trial / 2) % 6;
    for (int i = 0; i < n; ++i) xs.push_back(draw());
    for (int i = 0; i < m; ++i) ys.push_back(draw());
    auto result = eval::mann_whitney_u(xs, ys);
    CHECK(result.exact);
    CHECK(*result.p_value ==
          doctest::Approx(oracle::mwu_exact_oracle(xs, ys)).epsilon(1e-9));
  }
}

TEST_CASE("empty samples are rejected") {
  CHECK_THROWS_AS(eval::mann_whitney_u({}, {1.0}), EmptySampleError);
  CHECK_THROWS_AS(eval::mann_whitney_u({1.0}, {}), EmptySampleError);
  CHECK_THROWS_AS(eval::cliffs_delta({}, {1.0}), EmptySampleError);
  CHECK_THROWS_AS(eval::cohens_kappa({}, {}), EmptySampleError);
}

TEST_CASE("cliffs delta covers the listed examples and is antisymmetric") {
  auto dominant = eval::cliffs_delta({5, 6, 7}, {1, 2, 3});
  CHECK(dominant.statistic == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*dominant.effect == "large");

  auto equal = eval::cliffs_delta({1, 2, 3}, {1, 2, 3});
  CHECK(equal.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*equal.effect == "negligible");

  auto mixed = eval::cliffs_delta({1, 2}, {1, 3});
  CHECK(mixed.statistic == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(*mixed.effect == "small");

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0, 5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 6; ++i) xs.push_back(uni(rng));
    for (int i = 0; i < 9; ++i) ys.push_back(uni(rng));
    CHECK(eval::cliffs_delta(xs, ys).statistic ==
          doctest::Approx(-eval::cliffs_delta(ys, xs).statistic).epsilon(1e-12));
  }
}

TEST_CASE("effect labels change at the published thresholds") {
  auto label = [](double delta) {
    std::vector<double> xs, ys;
    int total = 1000;
    int above = static_cast<int>((delta + 1) / 2 * total);
    for (int i = 0; i < above; ++i) { xs.push_back(1); ys.push_back(0); }
    for (int i = above; i < total; ++i) { xs.push_back(0); ys.push_back(1); }
    // xs vs ys here gives delta = (above - (total-above))/total.
    return *eval::cliffs_delta(xs, ys).effect;
  };
  CHECK(label(0.146) == "negligible");
  CHECK(label(0.148) == "small");
  CHECK(label(0.32) == "small");
  CHECK(label(0.34) == "medium");
  CHECK(label(0.472) == "medium");
  CHECK(label(0.476) == "large");
}

TEST_CASE("kappa reproduces both hand-worked tables") {
  auto zero = eval::cohens_kappa({"Y", "Y", "N", "N"}, {"Y", "N", "Y", "N"});
  CHECK(zero.statistic == doctest::Approx(0.0).epsilon(1e-12));

  auto third = eval::cohens_kappa({"Y", "Y", "Y", "N", "N", "N"},
                                  {"Y", "Y", "N", "N", "N", "Y"});
  CHECK(third.statistic == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("kappa is symmetric and full agreement with one label counts as one") {
  std::vector<std::string> a = {"A", "B", "A", "C", "B"};
  std::vector<std::string> b = {"B", "B", "A", "A", "B"};
  CHECK(eval::cohens_kappa(a, b).statistic ==
        doctest::Approx(eval::cohens_kappa(b, a).statistic).epsilon(1e-12));

  // Both raters always said yes: p_e = 1, treated as perfect agreement.
  auto unanimous = eval::cohens_kappa({"Y", "Y", "Y"}, {"Y", "Y", "Y"});
  CHECK(unanimous.statistic == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(eval::cohens_kappa({"Y"}, {"Y", "N"}), LengthMismatchError);
}

TEST_CASE("significance codes follow the r convention") {
  CHECK(eval::significance_code(0.0005) == "***");
  CHECK(eval::significance_code(0.005) == "**");
  CHECK(eval::significance_code(0.03) == "*");
  CHECK(eval::significance_code(0.07) == ".");
  CHECK(eval::significance_code(0.5) == " ");
  CHECK(std::string(eval::significance_legend()).find("0.001") != std::string::npos);
}

TEST_CASE("coverage accepts only the five point scale") {
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(eval::coverage_scale(v) == v);
  CHECK_THROWS_AS(eval::coverage_scale(0.3), ScaleError);
  CHECK_THROWS_AS(eval::coverage_scale(-0.25), ScaleError);
  CHECK_THROWS_AS(eval::coverage_scale(1.25), ScaleError);
  auto score = eval::make_coverage("U1", 0.75, eval::CoverageAspect::Hallucination);
  CHECK(score.unit_id == "U1");
  CHECK(score.value == 0.75);
}

TEST_CASE("judge criteria differ per level") {
  CHECK(eval::criteria_for(pipeline::Level::Function) ==
        std::vector<std::string>{"Clarity", "Conciseness", "Correctness"});
  CHECK(eval::criteria_for(pipeline::Level::File) ==
        std::vector<std::string>{"Purpose", "Functionality", "Clarity"});
  CHECK(eval::criteria_for(pipeline::Level::Project).empty());
}

TEST_CASE("judge prompts never reveal which side is which") {
  auto templates = agents::builtin_templates();
  for (bool ours_first : {true, false}) {
    std::string a = ours_first ? "our text" : "their text";
    std::string b = ours_first ? "their text" : "our text";
    auto request = eval::judge_request(templates, "the reference", a, b,
                                       pipeline::Level::Function);
    std::string lowered;
    for (char c : request.user_text + request.system_text)
      lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    CHECK(lowered.find("ours") == std::string::npos);
    CHECK(lowered.find("theirs") == std::string::npos);
    CHECK(lowered.find("baseline") == std::string::npos);
    CHECK(request.user_text.find("<ExplanationA>") != std::string::npos);
    CHECK(request.user_text.find("<ExplanationB>") != std::string::npos);
  }
}

TEST_CASE("file level judge prompts list the file criteria") {
  auto templates = agents::builtin_templates();
  auto request =
      eval::judge_request(templates, "ref", "a", "b", pipeline::Level::File);
  CHECK(request.user_text.find("Purpose") != std::string::npos);
  CHECK(request.user_text.find("Functionality") != std::string::npos);
  CHECK(request.user_text.find("Clarity") != std::string::npos);
}

TEST_CASE("pairwise verdicts carry the blinding side and the scores") {
  agents::AgentClient client;
  client.set_backend_all(std::make_shared<agents::MockBackend>());
  auto templates = agents::builtin_templates();

  eval::JudgePair pair;
  pair.pair_id = "p1";
  pair.reference = "does the thing";
  pair.ours = "our candidate";
  pair.theirs = "their candidate";

  auto a_side = eval::judge_pairwise(client, templates, pair,
                                     pipeline::Level::Function, true);
  CHECK(a_side.pair_id == "p1");
  CHECK(a_side.ours_was == "A");
  CHECK(a_side.criterion_scores.size() == 3);
  REQUIRE(a_side.winner.has_value());
  if (*a_side.winner == agents::Winner::A) CHECK(a_side.winner_label() == "Ours");
  if (*a_side.winner == agents::Winner::B) CHECK(a_side.winner_label() == "Theirs");

  auto b_side = eval::judge_pairwise(client, templates, pair,
                                     pipeline::Level::Function, false);
  CHECK(b_side.ours_was == "B");
  if (b_side.winner == agents::Winner::A) CHECK(b_side.winner_label() == "Theirs");
  if (b_side.winner == agents::Winner::B) CHECK(b_side.winner_label() == "Ours");
}

TEST_CASE("a pairwise call propagates parse failures to the caller") {
  agents::AgentClient client;
  client.set_backend_all(std::make_shared<agents::MockBackend>());
  auto templates = agents::builtin_templates();

  eval::JudgePair pair;
  pair.pair_id = "p1";
  pair.reference = "does the thing";
  pair.ours = "ECHO: Clarity: 9";
  pair.theirs = "completely different";

  CHECK_THROWS_AS(eval::judge_pairwise(client, templates, pair,
                                       pipeline::Level::Function, true),
                  JudgeParseError);
}

TEST_CASE("identical texts tie and the tie survives de-blinding") {
  agents::AgentClient client;
  client.set_backend_all(std::make_shared<agents::MockBackend>());
  auto templates = agents::builtin_templates();

  eval::JudgePair pair;
  pair.pair_id = "same";
  pair.reference = "ref";
  pair.ours = "matching text";
  pair.theirs = "matching text";
  for (bool ours_is_a : {true, false}) {
    auto verdict = eval::judge_pairwise(client, templates, pair,
                                        pipeline::Level::Function, ours_is_a);
    CHECK(!verdict.error.has_value());
    REQUIRE(verdict.winner.has_value());
    CHECK(*verdict.winner == agents::Winner::Tie);
    CHECK(verdict.winner_label() == "Tie");
  }
}

TEST_CASE("batch blinding is reproducible for a seed and spread across pairs") {
  agents::AgentClient client;
  client.set_backend_all(std::make_shared<agents::MockBackend>());
  auto templates = agents::builtin_templates();

  std::vector<eval::JudgePair> pairs;
  for (int i = 0; i < 12; ++i) {
    eval::JudgePair pair;
    pair.pair_id = "pair-" + std::to_string(i);
    pair.reference = "reference " + std::to_string(i);
    pair.ours = "ours text " + std::to_string(i);
    pair.theirs = "theirs text " + std::to_string(i);
    pairs.push_back(pair);
  }

  auto first = eval::judge_batch(client, templates, pairs, pipeline::Level::Function, 42);
  auto second = eval::judge_batch(client, templates, pairs, pipeline::Level::Function, 42);
  REQUIRE(first.size() == pairs.size());
  std::set<std::string> sides;
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].pair_id == second[i].pair_id);
    CHECK(first[i].ours_was == second[i].ours_was);
    CHECK(first[i].winner_label() == second[i].winner_label());
    sides.insert(first[i].ours_was);
  }
  CHECK(sides.size() == 2);

  // Input order must not change the assignment; blinding follows pair ids.
  auto reversed_pairs = pairs;
  std::reverse(reversed_pairs.begin(), reversed_pairs.end());
  auto reversed =
      eval::judge_batch(client, templates, reversed_pairs, pipeline::Level::Function, 42);
  for (const auto& v : reversed) {
    auto match = std::find_if(first.begin(), first.end(),
                              [&](const auto& w) { return w.pair_id == v.pair_id; });
    REQUIRE(match != first.end());
    CHECK(match->ours_was == v.ours_was);
  }
}

TEST_CASE("a parse failure is recorded and the batch keeps going") {
  agents::AgentClient client;
  client.set_backend_all(std::make_shared<agents::MockBackend>());
  auto templates = agents::builtin_templates();

  std::vector<eval::JudgePair> pairs;
  eval::JudgePair bad;
  bad.pair_id = "bad";
  bad.reference = "ref";
  bad.ours = "ECHO: total nonsense with no scores";
  bad.theirs = "fine text";
  pairs.push_back(bad);
  eval::JudgePair good;
  good.pair_id = "good";
  good.reference = "ref";
  good.ours = "ours";
  good.theirs = "theirs";
  pairs.push_back(good);

  auto verdicts =
      eval::judge_batch(client, templates, pairs, pipeline::Level::Function, 7);
  REQUIRE(verdicts.size() == 2);
  const auto& bad_verdict = verdicts[0].pair_id == "bad" ? verdicts[0] : verdicts[1];
  const auto& good_verdict = verdicts[0].pair_id == "bad" ? verdicts[1] : verdicts[0];
  CHECK(bad_verdict.error.has_value());
  CHECK(!good_verdict.error.has_value());
  CHECK(good_verdict.criterion_scores.size() == 3);
}

TEST_CASE("project level verdicts carry the similarity flag") {
  agents::AgentClient client;
  client.set_backend_all(std::make_shared<agents::MockBackend>());
  auto templates = agents::builtin_templates();

  std::vector<eval::JudgePair> pairs;
  eval::JudgePair pair;
  pair.pair_id = "proj";
  pair.reference = "builds reports";
  pair.ours = "generates reports";
  pair.theirs = "prints labels";
  pairs.push_back(pair);

  auto verdicts =
      eval::judge_batch(client, templates, pairs, pipeline::Level::Project, 3);
  REQUIRE(verdicts.size() == 1);
  CHECK(!verdicts[0].error.has_value());
  CHECK(verdicts[0].criterion_scores.empty());
  CHECK(verdicts[0].conceptually_similar.has_value());
  CHECK(verdicts[0].winner.has_value());
}
