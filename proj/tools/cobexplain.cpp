#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cobexplain/agents.hpp"
#include "cobexplain/artifacts.hpp"
#include "cobexplain/config.hpp"
#include "cobexplain/depgraph.hpp"
#include "cobexplain/errors.hpp"
#include "cobexplain/eval.hpp"
#include "cobexplain/json_io.hpp"
#include "cobexplain/pipeline.hpp"
#include "cobexplain/program.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cobexplain;

namespace {

cobol::FormatHint parse_format(const std::string& name) {
  if (name == "auto") return cobol::FormatHint::Auto;
  if (name == "fixed") return cobol::FormatHint::Fixed;
  if (name == "free") return cobol::FormatHint::Free;
  throw UsageError("unknown format '" + name + "' (expected auto, fixed, or free)");
}

bool is_cobol_source(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".cbl" || ext == ".cob" || ext == ".cobol";
}

std::vector<fs::path> cobol_files_under(const fs::path& root) {
  std::vector<fs::path> out;
  fs::recursive_directory_iterator it(root), end;
  for (; it != end; ++it) {
    std::string base = it->path().filename().string();
    if (it->is_directory() && !base.empty() && base[0] == '.') {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && is_cobol_source(it->path())) out.push_back(it->path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Writes into out_dir under a stable name, or to stdout when out_dir is empty.
void emit(const fs::path& out_dir, const std::string& name, const std::string& content) {
  if (out_dir.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / name);
  if (!out) throw IoError("cannot write " + (out_dir / name).string());
  out << content;
}

std::string json_text(const json& doc) { return doc.dump(2) + "\n"; }

// JSONL of {unit_id, text|reference_text} pairs.
std::map<std::string, std::string> read_unit_texts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
    if (!entry.contains("unit_id")) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": missing unit_id");
    }
    std::string text;
    if (entry.contains("text")) {
      text = entry["text"].get<std::string>();
    } else if (entry.contains("reference_text")) {
      text = entry["reference_text"].get<std::string>();
    } else {
      throw UsageError(path.string() + ":" + std::to_string(number) +
                       ": missing text or reference_text");
    }
    out[entry["unit_id"].get<std::string>()] = std::move(text);
  }
  return out;
}

std::shared_ptr<agents::Backend> make_backend(const config::BackendConfig& backend) {
  if (backend.kind == "remote") {
    return std::make_shared<agents::RemoteBackend>(backend.endpoint);
  }
  return std::make_shared<agents::MockBackend>();
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

// ---------------------------------------------------------------------------
// Subcommand options

struct ScanOptions {
  std::string root;
  int min_files = 2;
  double min_pct = 80.0;
  std::string out;
};

struct ParseCmdOptions {
  std::string file;
  std::string format = "auto";
  std::string out;
};

struct GraphOptions {
  std::string path;
  std::string format = "auto";
  bool dot = false;
  std::string out;
};

struct RefsOptions {
  std::string path;
  std::string format = "auto";
  std::string readme;
  std::string project;
  std::string out;
};

struct ExplainOptions {
  std::string root;
  std::string level = "all";
  std::string backend;
  std::int64_t limit = 0;
  std::string templates_dir;
  std::string out;
  std::string config_file;
  std::string cache_dir;
  bool no_cache = false;
  int max_in_flight = 0;
  int word_limit = 0;
  std::string name;
};

struct SimilarityOptions {
  std::string metric = "chrf";
  std::string refs;
  std::string hyps;
  std::string vectors;
  std::string out;
};

struct JudgeOptions {
  std::string level = "fn";
  std::string refs;
  std::string ours;
  std::string theirs;
  std::uint32_t seed = 0;
  std::string config_file;
  std::string backend;
  std::string out;
};

struct StatsOptions {
  std::string test = "mwu";
  std::string a_file;
  std::string b_file;
  std::string out;
};

struct CoverageOptions {
  std::string scores;
  std::string out;
};

struct TemplatesOptions {
  std::string out;
};

// ---------------------------------------------------------------------------
// Subcommand bodies

int run_scan(const ScanOptions& opts) {
  artifacts::CorpusFilterOptions filter;
  filter.min_cobol_files = opts.min_files;
  filter.min_cobol_line_pct = opts.min_pct;
  artifacts::CorpusReport report = artifacts::corpus_filter(opts.root, filter);
  emit(opts.out, "corpus-report.json", json_text(json_io::corpus_report_json(report)));
  return 0;
}

int run_parse(const ParseCmdOptions& opts) {
  cobol::SourceFile file = cobol::read_source_file(opts.file, parse_format(opts.format));
  cobol::Program program = cobol::parse_program(file);
  emit(opts.out, "program.json", json_text(json_io::program_json(program)));
  return 0;
}

int run_graph(const GraphOptions& opts) {
  depgraph::DepGraph graph;
  if (fs::is_directory(opts.path)) {
    std::vector<std::pair<std::string, cobol::Program>> programs;
    for (const auto& path : cobol_files_under(opts.path)) {
      programs.emplace_back(fs::relative(path, opts.path).generic_string(),
                            cobol::parse_program(cobol::read_source_file(path)));
    }
    std::vector<std::pair<std::string, const cobol::Program*>> views;
    views.reserve(programs.size());
    for (const auto& [rel, program] : programs) views.emplace_back(rel, &program);
    graph = depgraph::build_file_graph(views);
  } else {
    cobol::Program program =
        cobol::parse_program(cobol::read_source_file(opts.path, parse_format(opts.format)));
    graph = depgraph::build_function_graph(program);
  }

  if (opts.dot) {
    emit(opts.out, "graph.dot", json_io::graph_dot(graph));
  } else {
    emit(opts.out, "graph.json", json_text(json_io::graph_json(graph)));
  }
  return 0;
}

int run_refs(const RefsOptions& opts) {
  std::ostringstream lines;
  auto emit_pairs = [&lines](const cobol::Program& program) {
    for (const auto& pair : artifacts::extract_function_references(program)) {
      lines << json_io::reference_pair_json(pair).dump() << "\n";
    }
    if (auto pair = artifacts::extract_file_reference(program)) {
      lines << json_io::reference_pair_json(*pair).dump() << "\n";
    }
  };

  std::string project_name = opts.project;
  if (fs::is_directory(opts.path)) {
    if (project_name.empty()) {
      project_name = fs::absolute(opts.path).lexically_normal().filename().string();
    }
    for (const auto& path : cobol_files_under(opts.path)) {
      emit_pairs(cobol::parse_program(cobol::read_source_file(path)));
    }
  } else {
    if (project_name.empty()) project_name = "project";
    emit_pairs(
        cobol::parse_program(cobol::read_source_file(opts.path, parse_format(opts.format))));
  }

  if (!opts.readme.empty()) {
    std::ifstream in(opts.readme);
    if (!in) throw IoError("cannot read " + opts.readme);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (auto pair =
            artifacts::extract_project_reference(buf.str(), project_name, opts.readme)) {
      lines << json_io::reference_pair_json(*pair).dump() << "\n";
    }
  }

  emit(opts.out, "references.jsonl", lines.str());
  return 0;
}

config::Config effective_config(const std::string& config_file) {
  if (config_file.empty()) {
    config::Config config;
    config::validate(config);
    return config;
  }
  return config::load_config(config_file);
}

void attach_backends(agents::AgentClient& client, const config::Config& config) {
  client.set_backend(agents::RoleKind::CodeProcessing, make_backend(config.code));
  client.set_backend(agents::RoleKind::TextProcessing, make_backend(config.text));
  client.set_backend(agents::RoleKind::Judge, make_backend(config.judge));
}

int run_explain(const ExplainOptions& opts, const CLI::App* cmd) {
  config::Config config = effective_config(opts.config_file);
  if (cmd->count("--backend") > 0) {
    config.code.kind = opts.backend;
    config.text.kind = opts.backend;
    config.judge.kind = opts.backend;
  }
  if (cmd->count("--limit") > 0) config.code_limit = opts.limit;
  if (cmd->count("--templates") > 0) config.templates_dir = opts.templates_dir;
  if (cmd->count("--cache-dir") > 0) config.cache_dir = opts.cache_dir;
  if (cmd->count("--max-in-flight") > 0) config.max_in_flight = opts.max_in_flight;
  if (cmd->count("--word-limit") > 0) config.word_limit = opts.word_limit;
  config::validate(config);

  fs::path cache_dir = opts.no_cache ? fs::path() : config.cache_dir;
  agents::AgentClient client(config.role_set(), cache_dir);
  attach_backends(client, config);
  agents::TemplateSet templates = agents::load_templates(config.templates_dir);

  pipeline::ProjectRunOptions run;
  run.level = pipeline::run_level_from_name(opts.level);
  run.pipeline.max_in_flight = config.max_in_flight;
  run.pipeline.word_limit = config.word_limit;
  run.out_dir = opts.out;
  run.config_echo = config.to_json();
  run.project_name = opts.name;

  pipeline::ProjectRunResult result = pipeline::run_project(client, templates, opts.root, run);

  std::cerr << "explained " << result.function_explanations.size() << " functions, "
            << result.file_explanations.size() << " files"
            << (result.project_explanation ? ", 1 project" : "") << " in project "
            << result.project_name << "\n";

  if (opts.out.empty()) {
    auto print = [](const pipeline::Explanation& e) {
      std::cout << json{{"level", pipeline::level_name(e.level)},
                        {"sources", e.sources},
                        {"status", pipeline::status_name(e.status)},
                        {"text", e.text},
                        {"unit_id", e.unit_id},
                        {"word_count", e.word_count}}
                       .dump()
                << "\n";
    };
    for (const auto& [id, e] : result.function_explanations) {
      (void)id;
      print(e);
    }
    for (const auto& [id, e] : result.file_explanations) {
      (void)id;
      print(e);
    }
    if (result.project_explanation) print(*result.project_explanation);
  }
  return 0;
}

int run_similarity(const SimilarityOptions& opts) {
  std::map<std::string, std::string> refs = read_unit_texts(opts.refs);
  std::map<std::string, std::string> hyps = read_unit_texts(opts.hyps);

  std::unique_ptr<eval::EmbeddingSource> embedder;
  if (opts.metric == "cosine") {
    if (opts.vectors.empty()) {
      throw UsageError("--metric cosine needs --vectors with precomputed embeddings");
    }
    embedder = std::make_unique<eval::PrecomputedEmbeddings>(opts.vectors);
  }

  std::ostringstream lines;
  std::vector<double> values;
  int unpaired = 0;
  for (const auto& [unit_id, hyp_text] : hyps) {
    auto ref = refs.find(unit_id);
    if (ref == refs.end()) {
      ++unpaired;
      continue;
    }
    eval::SimilarityScore score;
    if (opts.metric == "chrf") {
      score = eval::chrf(hyp_text, ref->second);
    } else if (opts.metric == "meteor") {
      score = eval::meteor_lite(hyp_text, ref->second);
    } else if (opts.metric == "cosine") {
      score = eval::cosine(embedder->embed(hyp_text), embedder->embed(ref->second));
    } else {
      throw UsageError("unknown metric '" + opts.metric +
                       "' (expected chrf, meteor, or cosine)");
    }
    score.hyp_id = unit_id;
    score.ref_id = unit_id;
    values.push_back(score.value);
    lines << json{{"hyp_id", score.hyp_id},
                  {"metric", eval::metric_name(score.metric)},
                  {"ref_id", score.ref_id},
                  {"value", score.value}}
                 .dump()
          << "\n";
  }
  for (const auto& [unit_id, text] : refs) {
    (void)text;
    if (!hyps.count(unit_id)) ++unpaired;
  }

  json summary = {
      {"count", values.size()},
      {"mean", mean_of(values)},
      {"median", median_of(values)},
      {"metric", opts.metric},
      {"unpaired", unpaired},
  };
  if (opts.metric == "meteor") {
    summary["note"] =
        "exact and suffix-stem matching only; synonym and paraphrase stages are omitted";
  }

  emit(opts.out, "scores.jsonl", lines.str());
  if (opts.out.empty()) {
    std::cout << summary.dump(2) << "\n";
  } else {
    emit(opts.out, "summary.json", json_text(summary));
  }
  return 0;
}

int run_judge(const JudgeOptions& opts, const CLI::App* cmd) {
  std::map<std::string, std::string> refs = read_unit_texts(opts.refs);
  std::map<std::string, std::string> ours = read_unit_texts(opts.ours);
  std::map<std::string, std::string> theirs = read_unit_texts(opts.theirs);

  pipeline::Level level = pipeline::Level::Function;
  if (opts.level == "fn") {
    level = pipeline::Level::Function;
  } else if (opts.level == "file") {
    level = pipeline::Level::File;
  } else if (opts.level == "project") {
    level = pipeline::Level::Project;
  } else {
    throw UsageError("unknown level '" + opts.level + "' (expected fn, file, or project)");
  }

  config::Config config = effective_config(opts.config_file);
  if (cmd->count("--backend") > 0) config.judge.kind = opts.backend;
  config::validate(config);
  agents::AgentClient client(config.role_set(), fs::path());
  attach_backends(client, config);
  agents::TemplateSet templates = agents::load_templates(config.templates_dir);

  std::vector<eval::JudgePair> pairs;
  for (const auto& [unit_id, reference] : refs) {
    auto a = ours.find(unit_id);
    auto b = theirs.find(unit_id);
    if (a == ours.end() || b == theirs.end()) continue;
    pairs.push_back(eval::JudgePair{unit_id, reference, a->second, b->second});
  }

  std::uint32_t seed = cmd->count("--seed") > 0 ? opts.seed : config.seed;
  std::vector<eval::JudgeVerdict> verdicts =
      eval::judge_batch(client, templates, pairs, level, seed);

  std::ostringstream lines;
  std::map<std::string, std::vector<double>> by_criterion;
  int ours_wins = 0;
  int theirs_wins = 0;
  int ties = 0;
  int errors = 0;
  int similar = 0;
  for (const auto& verdict : verdicts) {
    json entry = {
        {"criterion_scores", verdict.criterion_scores},
        {"ours_was", verdict.ours_was},
        {"pair_id", verdict.pair_id},
    };
    if (verdict.winner) {
      entry["winner"] = agents::winner_name(*verdict.winner);
      entry["winner_label"] = verdict.winner_label();
    }
    if (verdict.conceptually_similar) {
      entry["conceptually_similar"] = *verdict.conceptually_similar;
      if (*verdict.conceptually_similar) ++similar;
    }
    if (verdict.error) entry["error"] = *verdict.error;
    lines << entry.dump() << "\n";

    if (verdict.error) {
      ++errors;
    } else if (verdict.winner) {
      std::string label = verdict.winner_label();
      if (label == "Ours") {
        ++ours_wins;
      } else if (label == "Theirs") {
        ++theirs_wins;
      } else {
        ++ties;
      }
    }
    for (const auto& [criterion, value] : verdict.criterion_scores) {
      by_criterion[criterion].push_back(value);
    }
  }

  json mean_scores = json::object();
  for (const auto& [criterion, scores] : by_criterion) {
    mean_scores[criterion] = mean_of(scores);
  }
  json summary = {
      {"errors", errors},
      {"level", opts.level},
      {"mean_scores", mean_scores},
      {"ours_wins", ours_wins},
      {"pairs", verdicts.size()},
      {"seed", seed},
      {"theirs_wins", theirs_wins},
      {"ties", ties},
  };
  if (level == pipeline::Level::Project) summary["conceptually_similar"] = similar;

  emit(opts.out, "verdicts.jsonl", lines.str());
  if (opts.out.empty()) {
    std::cout << summary.dump(2) << "\n";
  } else {
    emit(opts.out, "summary.json", json_text(summary));
  }
  return 0;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

int run_stats(const StatsOptions& opts) {
  json a = read_json_file(opts.a_file);
  json b = read_json_file(opts.b_file);
  if (!a.is_array() || !b.is_array()) {
    throw UsageError("--a and --b must hold JSON arrays");
  }

  json out;
  if (opts.test == "mwu" || opts.test == "cliffs") {
    std::vector<double> xs = a.get<std::vector<double>>();
    std::vector<double> ys = b.get<std::vector<double>>();
    eval::StatResult result =
        opts.test == "mwu" ? eval::mann_whitney_u(xs, ys) : eval::cliffs_delta(xs, ys);
    out = {{"statistic", result.statistic}, {"test", eval::stat_test_name(result.test)}};
    if (result.p_value) {
      out["p_value"] = *result.p_value;
      out["exact"] = result.exact;
      out["significance"] = eval::significance_code(*result.p_value);
      out["legend"] = eval::significance_legend();
    }
    if (result.effect) out["effect"] = *result.effect;
  } else if (opts.test == "kappa") {
    auto labels = [](const json& doc) {
      std::vector<std::string> out_labels;
      for (const auto& item : doc) {
        out_labels.push_back(item.is_string() ? item.get<std::string>() : item.dump());
      }
      return out_labels;
    };
    eval::StatResult result = eval::cohens_kappa(labels(a), labels(b));
    out = {{"statistic", result.statistic}, {"test", eval::stat_test_name(result.test)}};
  } else {
    throw UsageError("unknown test '" + opts.test + "' (expected mwu, cliffs, or kappa)");
  }

  emit(opts.out, "stats.json", json_text(out));
  return 0;
}

int run_coverage(const CoverageOptions& opts) {
  std::ifstream in(opts.scores);
  if (!in) throw IoError("cannot read " + opts.scores);

  std::vector<eval::CoverageScore> scores;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw UsageError(opts.scores + ":" + std::to_string(number) + ": " + e.what());
    }
    std::string aspect_name = entry.value("aspect", "reference-coverage");
    eval::CoverageAspect aspect;
    if (aspect_name == "reference-coverage") {
      aspect = eval::CoverageAspect::ReferenceCoverage;
    } else if (aspect_name == "hallucination") {
      aspect = eval::CoverageAspect::Hallucination;
    } else {
      throw UsageError(opts.scores + ":" + std::to_string(number) + ": unknown aspect '" +
                       aspect_name + "'");
    }
    try {
      scores.push_back(eval::make_coverage(entry.value("unit_id", ""),
                                           entry.at("value").get<double>(), aspect));
    } catch (const ScaleError& e) {
      throw ScaleError(opts.scores + ":" + std::to_string(number) + ": " + e.what());
    } catch (const json::exception& e) {
      throw UsageError(opts.scores + ":" + std::to_string(number) + ": " + e.what());
    }
  }

  std::map<std::string, std::vector<double>> by_aspect;
  std::vector<double> all;
  for (const auto& score : scores) {
    by_aspect[eval::coverage_aspect_name(score.aspect)].push_back(score.value);
    all.push_back(score.value);
  }
  json aspects = json::object();
  for (const auto& [name, values] : by_aspect) {
    aspects[name] = {{"count", values.size()}, {"mean", mean_of(values)}};
  }
  json summary = {{"by_aspect", aspects}, {"count", all.size()}, {"mean", mean_of(all)}};
  emit(opts.out, "coverage.json", json_text(summary));
  return 0;
}

int run_templates(const TemplatesOptions& opts) {
  agents::TemplateSet set = agents::builtin_templates();
  fs::create_directories(opts.out);
  for (const auto& name : set.names()) {
    std::ofstream out(fs::path(opts.out) / (name + ".tmpl"));
    if (!out) throw IoError("cannot write template " + name);
    out << agents::template_to_text(set.get(name));
    std::cerr << "wrote " << name << ".tmpl\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COBOL documentation toolchain: parsing, dependency graphs, "
               "agent-based explanation, and evaluation"};
  app.require_subcommand(1);

  ScanOptions scan_opts;
  CLI::App* scan = app.add_subcommand("scan", "Apply the corpus filter to a project tree");
  scan->add_option("root", scan_opts.root, "Project directory")->required();
  scan->add_option("--min-files", scan_opts.min_files, "Minimum COBOL file count");
  scan->add_option("--min-pct", scan_opts.min_pct, "Minimum COBOL line percentage");
  scan->add_option("--out", scan_opts.out, "Output directory");

  ParseCmdOptions parse_opts;
  CLI::App* parse = app.add_subcommand("parse", "Parse one COBOL file to JSON");
  parse->add_option("file", parse_opts.file, "COBOL source file")->required();
  parse->add_option("--format", parse_opts.format, "auto|fixed|free");
  parse->add_option("--out", parse_opts.out, "Output directory");

  GraphOptions graph_opts;
  CLI::App* graph = app.add_subcommand(
      "graph", "Function graph of a file, or file graph of a directory");
  graph->add_option("path", graph_opts.path, "COBOL file or project directory")->required();
  graph->add_option("--format", graph_opts.format, "auto|fixed|free");
  graph->add_flag("--dot", graph_opts.dot, "Emit DOT instead of JSON");
  graph->add_option("--out", graph_opts.out, "Output directory");

  RefsOptions refs_opts;
  CLI::App* refs = app.add_subcommand(
      "extract-refs", "Extract developer comments as reference texts");
  refs->add_option("path", refs_opts.path, "COBOL file or project directory")->required();
  refs->add_option("--format", refs_opts.format, "auto|fixed|free");
  refs->add_option("--readme", refs_opts.readme, "README file for a project-level reference");
  refs->add_option("--project", refs_opts.project, "Project name for the README reference");
  refs->add_option("--out", refs_opts.out, "Output directory");

  ExplainOptions explain_opts;
  CLI::App* explain = app.add_subcommand("explain", "Generate explanations for a project");
  explain->add_option("root", explain_opts.root, "Project directory")->required();
  explain->add_option("--level", explain_opts.level, "fn|file|project|all");
  explain->add_option("--backend", explain_opts.backend, "mock|remote for all roles")
      ->check(CLI::IsMember({"mock", "remote"}));
  explain->add_option("--limit", explain_opts.limit, "Code agent token limit");
  explain->add_option("--templates", explain_opts.templates_dir, "Prompt template directory");
  explain->add_option("--out", explain_opts.out, "Output directory");
  explain->add_option("--config", explain_opts.config_file, "JSON config file");
  explain->add_option("--cache-dir", explain_opts.cache_dir, "Response cache directory");
  explain->add_flag("--no-cache", explain_opts.no_cache, "Disable the response cache");
  explain->add_option("--max-in-flight", explain_opts.max_in_flight,
                      "Concurrent backend requests");
  explain->add_option("--word-limit", explain_opts.word_limit,
                      "Word target for function explanations");
  explain->add_option("--name", explain_opts.name, "Project name override");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluation utilities");
  eval_cmd->require_subcommand(1);

  SimilarityOptions sim_opts;
  CLI::App* similarity = eval_cmd->add_subcommand(
      "similarity", "Score hypothesis texts against references");
  similarity->add_option("--metric", sim_opts.metric, "chrf|meteor|cosine");
  similarity->add_option("--refs", sim_opts.refs, "Reference JSONL")->required();
  similarity->add_option("--hyps", sim_opts.hyps, "Hypothesis JSONL")->required();
  similarity->add_option("--vectors", sim_opts.vectors,
                         "Precomputed embedding JSONL (cosine only)");
  similarity->add_option("--out", sim_opts.out, "Output directory");

  JudgeOptions judge_opts;
  CLI::App* judge = eval_cmd->add_subcommand("judge", "Blinded pairwise comparison");
  judge->add_option("--level", judge_opts.level, "fn|file|project");
  judge->add_option("--refs", judge_opts.refs, "Reference JSONL")->required();
  judge->add_option("--ours", judge_opts.ours, "Our explanations JSONL")->required();
  judge->add_option("--theirs", judge_opts.theirs, "Competing explanations JSONL")->required();
  judge->add_option("--seed", judge_opts.seed, "Blinding seed");
  judge->add_option("--config", judge_opts.config_file, "JSON config file");
  judge->add_option("--backend", judge_opts.backend, "mock|remote for the judge role")
      ->check(CLI::IsMember({"mock", "remote"}));
  judge->add_option("--out", judge_opts.out, "Output directory");

  StatsOptions stats_opts;
  CLI::App* stats = eval_cmd->add_subcommand("stats", "Statistical tests on score arrays");
  stats->add_option("--test", stats_opts.test, "mwu|cliffs|kappa");
  stats->add_option("--a", stats_opts.a_file, "JSON array for the first sample")->required();
  stats->add_option("--b", stats_opts.b_file, "JSON array for the second sample")->required();
  stats->add_option("--out", stats_opts.out, "Output directory");

  CoverageOptions coverage_opts;
  CLI::App* coverage = eval_cmd->add_subcommand(
      "coverage", "Validate and summarize manual coverage annotations");
  coverage->add_option("--scores", coverage_opts.scores, "Annotation JSONL")->required();
  coverage->add_option("--out", coverage_opts.out, "Output directory");

  TemplatesOptions templates_opts;
  CLI::App* templates = app.add_subcommand(
      "templates", "Write the built-in prompt templates to a directory for editing");
  templates->add_option("--out", templates_opts.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (scan->parsed()) return run_scan(scan_opts);
    if (parse->parsed()) return run_parse(parse_opts);
    if (graph->parsed()) return run_graph(graph_opts);
    if (refs->parsed()) return run_refs(refs_opts);
    if (explain->parsed()) return run_explain(explain_opts, explain);
    if (eval_cmd->parsed()) {
      if (similarity->parsed()) return run_similarity(sim_opts);
      if (judge->parsed()) return run_judge(judge_opts, judge);
      if (stats->parsed()) return run_stats(stats_opts);
      if (coverage->parsed()) return run_coverage(coverage_opts);
    }
    if (templates->parsed()) return run_templates(templates_opts);
    throw UsageError("no subcommand selected");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
