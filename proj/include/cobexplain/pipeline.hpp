#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cobexplain/agents.hpp"
#include "cobexplain/artifacts.hpp"
#include "cobexplain/explanation.hpp"
#include "cobexplain/program.hpp"
#include "nlohmann/json.hpp"

namespace cobexplain::pipeline {

enum class FileClassKind { Short, Long };

const char* file_class_name(FileClassKind cls);

// Short files fit the code agent's window in one prompt; long files go
// through hierarchical merging of their function explanations.
struct FileClass {
  std::string file_id;
  FileClassKind cls = FileClassKind::Short;
  std::int64_t token_estimate = 0;
  std::int64_t limit = 0;
};

// One completion issued during a run.  sequence is a logical counter, not a
// wall clock, so identical runs produce identical manifests.
struct ManifestRecord {
  std::string unit_id;
  std::string item;  // merge product name (MERGE-<round>-<index>), else empty
  Level level = Level::Function;
  std::string step;  // function-step1, function-step2, file-short, file-merge, project-merge
  int sequence = 0;
  std::string cache_key;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

class RunManifest {
 public:
  void set_project(std::string name) { project_ = std::move(name); }
  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_usage(const std::map<std::string, agents::Usage>& usage);

  int next_sequence() { return ++sequence_; }
  void add_record(ManifestRecord record);
  void add_file_class(FileClass file_class);
  void add_explanation(const Explanation& explanation);

  const std::vector<ManifestRecord>& records() const { return records_; }
  const std::vector<FileClass>& file_classes() const { return files_; }

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string project_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<FileClass> files_;
  std::vector<ManifestRecord> records_;
  std::vector<nlohmann::json> explanations_;
  nlohmann::json usage_ = nlohmann::json::object();
  int sequence_ = 0;
};

struct PipelineOptions {
  int max_in_flight = 4;
  int word_limit = 75;
};

// Shared state for one run.  The manifest pointer may be null when the
// caller does not need request records.
struct PipelineContext {
  agents::AgentClient& client;
  const agents::TemplateSet& templates;
  PipelineOptions options{};
  RunManifest* manifest = nullptr;
};

// Code agent pass over one function's source, variables, and callee names.
// unit_id defaults to the function name; a caller may qualify it.
Explanation explain_function_step1(PipelineContext& ctx, const artifacts::FunctionArtifacts& fn,
                                   const std::string& unit_id = {});

// Text agent refinement of a preliminary explanation against callee
// explanations, given as (name, text) pairs.
Explanation explain_function_step2(PipelineContext& ctx, const Explanation& preliminary,
                                   const std::vector<std::pair<std::string, std::string>>& callee_terms);

// Runs step 1 for every function, then walks the refinement order layer by
// layer until each function is Final.  Functions that call nothing keep
// their preliminary text; cyclic groups are refined in one joint pass with
// in-cycle callees represented by preliminary text.  Keys are plain function
// names; explanation ids carry "<file_id>::" when file_id is given.
std::map<std::string, Explanation> explain_all_functions(PipelineContext& ctx,
                                                         const cobol::Program& program,
                                                         const std::string& file_id = {});

// Measures the rendered one-shot file prompt against the code agent's
// window; at or under the limit is Short.
FileClass classify_file(PipelineContext& ctx, const artifacts::FileArtifacts& file);

Explanation explain_file_short(PipelineContext& ctx, const artifacts::FileArtifacts& file);

// Hierarchical merge of the file's function explanations, batched greedily
// in refinement order under the text agent's window.
Explanation explain_file_long(PipelineContext& ctx, const artifacts::FileArtifacts& file);

// Classifies, then dispatches to the short or long path.
Explanation explain_file(PipelineContext& ctx, const artifacts::FileArtifacts& file);

// Hierarchical merge of the file explanations, ordered by topological rank.
Explanation explain_project(PipelineContext& ctx, const artifacts::ProjectArtifacts& project);

// ---------------------------------------------------------------------------
// Whole-project runs

enum class RunLevel { Functions, Files, Project, All };

RunLevel run_level_from_name(const std::string& name);  // fn|file|project|all

struct ProjectRunOptions {
  RunLevel level = RunLevel::All;
  PipelineOptions pipeline{};
  std::filesystem::path out_dir;  // when set, explanations.jsonl + manifest.json land here
  nlohmann::json config_echo = nlohmann::json::object();
  std::string project_name;  // default: root directory name
};

struct ProjectRunResult {
  std::string project_name;
  artifacts::CorpusReport report;
  std::vector<std::string> files;  // relative paths, sorted
  std::map<std::string, Explanation> function_explanations;  // "<file>::<NAME>" keys
  std::map<std::string, Explanation> file_explanations;
  std::optional<Explanation> project_explanation;
  RunManifest manifest;
};

// Applies the corpus filter, parses every COBOL source file under root, and
// explains up to the requested level.  Resets the client's usage counters at
// the start so the manifest reflects this run only.  On failure after partial
// progress the manifest written so far is still flushed to out_dir.
ProjectRunResult run_project(agents::AgentClient& client, const agents::TemplateSet& templates,
                             const std::filesystem::path& root,
                             const ProjectRunOptions& options = {});

namespace detail {

// Runs fn(0..count-1) on up to max_in_flight threads; rethrows the
// lowest-index exception after all workers finish.
void parallel_for(std::size_t count, int max_in_flight,
                  const std::function<void(std::size_t)>& fn);

}  // namespace detail

}  // namespace cobexplain::pipeline
