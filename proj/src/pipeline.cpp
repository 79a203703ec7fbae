#include "cobexplain/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "cobexplain/depgraph.hpp"
#include "cobexplain/errors.hpp"

namespace cobexplain::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const char* file_class_name(FileClassKind cls) {
  return cls == FileClassKind::Short ? "Short" : "Long";
}

// ---------------------------------------------------------------------------
// Manifest

void RunManifest::set_usage(const std::map<std::string, agents::Usage>& usage) {
  usage_ = json::object();
  for (const auto& [role, counts] : usage) {
    // Cache hits and backend calls are deliberately omitted: a warm rerun
    // must produce a byte-identical manifest.
    usage_[role] = {
        {"completion_tokens", counts.completion_tokens},
        {"prompt_tokens", counts.prompt_tokens},
        {"requests", counts.requests},
    };
  }
}

void RunManifest::add_record(ManifestRecord record) {
  records_.push_back(std::move(record));
}

void RunManifest::add_file_class(FileClass file_class) {
  files_.push_back(std::move(file_class));
}

void RunManifest::add_explanation(const Explanation& explanation) {
  explanations_.push_back(json{
      {"level", level_name(explanation.level)},
      {"sources", explanation.sources},
      {"status", status_name(explanation.status)},
      {"unit_id", explanation.unit_id},
      {"word_count", explanation.word_count},
  });
}

json RunManifest::to_json() const {
  json records = json::array();
  std::vector<const ManifestRecord*> ordered;
  ordered.reserve(records_.size());
  for (const auto& record : records_) ordered.push_back(&record);
  std::sort(ordered.begin(), ordered.end(),
            [](const ManifestRecord* a, const ManifestRecord* b) {
              return a->sequence < b->sequence;
            });
  for (const ManifestRecord* record : ordered) {
    records.push_back(json{
        {"cache_key", record->cache_key},
        {"completion_tokens", record->completion_tokens},
        {"item", record->item},
        {"level", level_name(record->level)},
        {"prompt_tokens", record->prompt_tokens},
        {"sequence", record->sequence},
        {"step", record->step},
        {"unit_id", record->unit_id},
    });
  }

  json files = json::array();
  for (const auto& fc : files_) {
    files.push_back(json{
        {"class", file_class_name(fc.cls)},
        {"file", fc.file_id},
        {"limit", fc.limit},
        {"token_estimate", fc.token_estimate},
    });
  }

  return json{
      {"config", config_},       {"explanations", explanations_},
      {"files", files},          {"project", project_},
      {"records", records},      {"usage", usage_},
  };
}

void RunManifest::write(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Parallel execution

namespace detail {

void parallel_for(std::size_t count, int max_in_flight,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t workers = std::min<std::size_t>(count, std::max(max_in_flight, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Prompt assembly helpers

namespace {

std::string variable_lines(const std::vector<std::pair<std::string, std::string>>& variables) {
  std::string out;
  for (const auto& [name, picture] : variables) {
    if (!out.empty()) out += '\n';
    out += name;
    if (!picture.empty()) out += " PIC " + picture;
  }
  return out;
}

std::string variable_lines(const std::vector<cobol::DataItem>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += '\n';
    out += item.name;
    if (item.picture) out += " PIC " + *item.picture;
  }
  return out;
}

std::string called_lines(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& name : names) {
    if (!out.empty()) out += '\n';
    out += name;
  }
  return out;
}

agents::CompletionRequest step1_request(PipelineContext& ctx,
                                        const artifacts::FunctionArtifacts& fn) {
  const agents::PromptTemplate& tmpl = ctx.templates.get("function_step1");
  agents::Bindings bindings;
  bindings.emplace_back("Code", fn.source);
  bindings.emplace_back("Variable", variable_lines(fn.variables));
  bindings.emplace_back("CalledFunctions", called_lines(fn.called_functions));
  agents::CompletionRequest request;
  request.role = tmpl.role;
  request.system_text = tmpl.system_text;
  request.user_text = agents::render_prompt(
      tmpl, bindings, {{"word_limit", std::to_string(ctx.options.word_limit)}});
  return request;
}

agents::CompletionRequest step2_request(
    PipelineContext& ctx, const std::string& preliminary_text,
    const std::vector<std::pair<std::string, std::string>>& callee_terms) {
  const agents::PromptTemplate& tmpl = ctx.templates.get("function_step2");
  agents::Bindings bindings;
  bindings.emplace_back("Main", preliminary_text);
  for (const auto& [name, text] : callee_terms) {
    bindings.emplace_back("Term", name + ": " + text);
  }
  agents::CompletionRequest request;
  request.role = tmpl.role;
  request.system_text = tmpl.system_text;
  request.user_text = agents::render_prompt(
      tmpl, bindings, {{"word_limit", std::to_string(ctx.options.word_limit)}});
  return request;
}

agents::CompletionRequest short_file_request(PipelineContext& ctx,
                                             const artifacts::FileArtifacts& file) {
  const agents::PromptTemplate& tmpl = ctx.templates.get("file_short");
  agents::Bindings bindings;
  bindings.emplace_back("Code", file.source);
  bindings.emplace_back("Variable", variable_lines(file.variables));
  agents::CompletionRequest request;
  request.role = tmpl.role;
  request.system_text = tmpl.system_text;
  request.user_text = agents::render_prompt(
      tmpl, bindings,
      {{"file_name", file.file_name}, {"program_id", file.program_id}});
  return request;
}

void record_request(PipelineContext& ctx, const std::string& unit_id, const std::string& item,
                    Level level, const std::string& step,
                    const agents::CompletionResponse& response) {
  if (ctx.manifest == nullptr) return;
  ManifestRecord record;
  record.unit_id = unit_id;
  record.item = item;
  record.level = level;
  record.step = step;
  record.sequence = ctx.manifest->next_sequence();
  record.cache_key = response.cache_key;
  record.prompt_tokens = response.prompt_tokens;
  record.completion_tokens = response.completion_tokens;
  ctx.manifest->add_record(std::move(record));
}

std::string qualify(const std::string& file_id, const std::string& name) {
  return file_id.empty() ? name : file_id + "::" + name;
}

}  // namespace

// ---------------------------------------------------------------------------
// Function pipeline

Explanation explain_function_step1(PipelineContext& ctx, const artifacts::FunctionArtifacts& fn,
                                   const std::string& unit_id) {
  std::string id = unit_id.empty() ? fn.function_name : unit_id;
  agents::CompletionRequest request = step1_request(ctx, fn);
  agents::CompletionResponse response = ctx.client.complete(request, id);
  record_request(ctx, id, "", Level::Function, "function-step1", response);
  return make_explanation(id, Level::Function, Status::Preliminary, response.text,
                          {response.cache_key});
}

Explanation explain_function_step2(PipelineContext& ctx, const Explanation& preliminary,
                                   const std::vector<std::pair<std::string, std::string>>& callee_terms) {
  agents::CompletionRequest request = step2_request(ctx, preliminary.text, callee_terms);
  agents::CompletionResponse response = ctx.client.complete(request, preliminary.unit_id);
  record_request(ctx, preliminary.unit_id, "", Level::Function, "function-step2", response);
  std::vector<std::string> sources = preliminary.sources;
  sources.push_back(response.cache_key);
  return make_explanation(preliminary.unit_id, Level::Function, Status::Final, response.text,
                          std::move(sources));
}

std::map<std::string, Explanation> explain_all_functions(PipelineContext& ctx,
                                                         const cobol::Program& program,
                                                         const std::string& file_id) {
  std::vector<std::string> units = artifacts::function_units(program);
  std::map<std::string, artifacts::FunctionArtifacts> arts;
  for (const auto& name : units) {
    arts.emplace(name, artifacts::function_artifacts(program, name));
  }

  depgraph::DepGraph graph = depgraph::build_function_graph(program);
  depgraph::RefinementOrder order = depgraph::refinement_order(graph);

  // Step 1 for every function, one parallel batch.
  std::vector<agents::CompletionRequest> requests;
  requests.reserve(units.size());
  for (const auto& name : units) requests.push_back(step1_request(ctx, arts.at(name)));
  std::vector<agents::CompletionResponse> responses(units.size());
  detail::parallel_for(units.size(), ctx.options.max_in_flight, [&](std::size_t i) {
    responses[i] = ctx.client.complete(requests[i], qualify(file_id, units[i]));
  });

  std::map<std::string, Explanation> preliminary;
  for (std::size_t i = 0; i < units.size(); ++i) {
    record_request(ctx, qualify(file_id, units[i]), "", Level::Function, "function-step1",
                   responses[i]);
    preliminary.emplace(units[i],
                        make_explanation(qualify(file_id, units[i]), Level::Function,
                                         Status::Preliminary, responses[i].text,
                                         {responses[i].cache_key}));
  }

  std::map<std::string, Explanation> finals;
  for (const auto& layer : order.layers) {
    // Functions that call nothing are already final; the rest get a text
    // agent pass with one <Term> per callee.
    struct Step2Item {
      std::string name;
      agents::CompletionRequest request;
    };
    std::vector<Step2Item> batch;
    for (int comp_index : layer) {
      const depgraph::Component& comp = order.condensation.components[comp_index];
      std::set<std::string> in_component(comp.members.begin(), comp.members.end());
      for (const auto& name : comp.members) {
        const artifacts::FunctionArtifacts& art = arts.at(name);
        const Explanation& prelim = preliminary.at(name);
        if (art.called_functions.empty()) {
          Explanation done = prelim;
          done.status = Status::Final;
          finals.emplace(name, std::move(done));
          continue;
        }
        std::vector<std::pair<std::string, std::string>> terms;
        for (const auto& callee : art.called_functions) {
          if (in_component.count(callee)) {
            terms.emplace_back(callee, preliminary.at(callee).text);
            continue;
          }
          auto it = finals.find(callee);
          if (it == finals.end()) {
            throw PipelineOrderError("callee " + callee + " of " + name +
                                     " has no final explanation yet");
          }
          terms.emplace_back(callee, it->second.text);
        }
        batch.push_back(Step2Item{name, step2_request(ctx, prelim.text, terms)});
      }
    }

    std::vector<agents::CompletionResponse> step2(batch.size());
    detail::parallel_for(batch.size(), ctx.options.max_in_flight, [&](std::size_t i) {
      step2[i] = ctx.client.complete(batch[i].request, qualify(file_id, batch[i].name));
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const std::string& name = batch[i].name;
      record_request(ctx, qualify(file_id, name), "", Level::Function, "function-step2",
                     step2[i]);
      std::vector<std::string> sources = preliminary.at(name).sources;
      sources.push_back(step2[i].cache_key);
      finals.emplace(name, make_explanation(qualify(file_id, name), Level::Function,
                                            Status::Final, step2[i].text, std::move(sources)));
    }
  }
  return finals;
}

// ---------------------------------------------------------------------------
// File pipeline

FileClass classify_file(PipelineContext& ctx, const artifacts::FileArtifacts& file) {
  agents::CompletionRequest request = short_file_request(ctx, file);
  FileClass fc;
  fc.file_id = file.file_name;
  fc.token_estimate = ctx.client.prompt_estimate(request);
  fc.limit = ctx.client.roles().for_kind(request.role).token_limit;
  fc.cls = fc.token_estimate <= fc.limit ? FileClassKind::Short : FileClassKind::Long;
  if (ctx.manifest != nullptr) ctx.manifest->add_file_class(fc);
  return fc;
}

Explanation explain_file_short(PipelineContext& ctx, const artifacts::FileArtifacts& file) {
  agents::CompletionRequest request = short_file_request(ctx, file);
  agents::CompletionResponse response = ctx.client.complete(request, file.file_name);
  record_request(ctx, file.file_name, "", Level::File, "file-short", response);
  return make_explanation(file.file_name, Level::File, Status::Final, response.text,
                          {response.cache_key});
}

namespace {

struct MergeItem {
  std::string name;
  std::string text;
};

struct MergeConfig {
  std::string unit_id;
  Level level = Level::File;
  std::string step;
  const agents::PromptTemplate* tmpl = nullptr;
  std::map<std::string, std::string> substitutions;
  std::string item_tag;
  std::string context_tag;
  // Context text for a prospective batch; round 1 sees original items.
  std::function<std::string(const std::vector<MergeItem>&, int round)> context_text;
};

agents::CompletionRequest merge_request(const MergeConfig& config,
                                        const std::vector<MergeItem>& batch, int round) {
  agents::Bindings bindings;
  for (const auto& item : batch) {
    bindings.emplace_back(config.item_tag, item.name + ": " + item.text);
  }
  bindings.emplace_back(config.context_tag, config.context_text(batch, round));
  agents::CompletionRequest request;
  request.role = config.tmpl->role;
  request.system_text = config.tmpl->system_text;
  request.user_text = agents::render_prompt(*config.tmpl, bindings, config.substitutions);
  return request;
}

// Greedy batches under the role's token limit, repeated in rounds until a
// single explanation remains.  Returns the final text plus every cache key
// used along the way.
std::pair<std::string, std::vector<std::string>> hierarchical_merge(
    PipelineContext& ctx, const MergeConfig& config, std::vector<MergeItem> items) {
  std::int64_t limit = ctx.client.roles().for_kind(config.tmpl->role).token_limit;
  std::vector<std::string> sources;

  for (int round = 1;; ++round) {
    std::vector<std::vector<MergeItem>> batches;
    std::vector<MergeItem> current;
    for (const auto& item : items) {
      std::vector<MergeItem> candidate = current;
      candidate.push_back(item);
      agents::CompletionRequest probe = merge_request(config, candidate, round);
      if (ctx.client.prompt_estimate(probe) <= limit) {
        current = std::move(candidate);
        continue;
      }
      if (current.empty()) {
        throw UnmergeableUnitError(config.unit_id + ": explanation of " + item.name +
                                   " alone exceeds the merge window of " +
                                   std::to_string(limit) + " tokens");
      }
      batches.push_back(std::move(current));
      current = {item};
      agents::CompletionRequest solo = merge_request(config, current, round);
      if (ctx.client.prompt_estimate(solo) > limit) {
        throw UnmergeableUnitError(config.unit_id + ": explanation of " + item.name +
                                   " alone exceeds the merge window of " +
                                   std::to_string(limit) + " tokens");
      }
    }
    if (!current.empty()) batches.push_back(std::move(current));

    std::vector<agents::CompletionRequest> requests;
    requests.reserve(batches.size());
    for (const auto& batch : batches) requests.push_back(merge_request(config, batch, round));
    std::vector<agents::CompletionResponse> responses(batches.size());
    detail::parallel_for(batches.size(), ctx.options.max_in_flight, [&](std::size_t i) {
      responses[i] = ctx.client.complete(requests[i], config.unit_id);
    });

    std::vector<MergeItem> products;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      std::string product =
          "MERGE-" + std::to_string(round) + "-" + std::to_string(i);
      record_request(ctx, config.unit_id, product, config.level, config.step, responses[i]);
      sources.push_back(responses[i].cache_key);
      products.push_back(MergeItem{product, responses[i].text});
    }
    if (products.size() == 1) return {products[0].text, sources};
    items = std::move(products);
  }
}

// Function explanations flattened into refinement order (callees first).
std::vector<MergeItem> ordered_function_items(const artifacts::FileArtifacts& file) {
  depgraph::DepGraph graph;
  graph.kind = depgraph::GraphKind::Function;
  for (const auto& [name, expl] : file.function_explanations) {
    (void)expl;
    graph.nodes.insert(name);
  }
  for (const auto& [caller, callee] : file.function_dependencies) {
    graph.nodes.insert(caller);
    graph.nodes.insert(callee);
    if (caller == callee) {
      graph.self_loops.insert(caller);
    } else {
      graph.edges.emplace(caller, callee);
    }
  }
  depgraph::RefinementOrder order = depgraph::refinement_order(graph);

  std::vector<MergeItem> items;
  for (const auto& layer : order.layers) {
    for (int comp_index : layer) {
      for (const auto& name : order.condensation.components[comp_index].members) {
        auto it = file.function_explanations.find(name);
        if (it == file.function_explanations.end()) {
          throw PipelineOrderError("function " + name + " of " + file.file_name +
                                   " has no explanation for the merge");
        }
        items.push_back(MergeItem{name, it->second.text});
      }
    }
  }
  return items;
}

}  // namespace

Explanation explain_file_long(PipelineContext& ctx, const artifacts::FileArtifacts& file) {
  std::vector<MergeItem> items = ordered_function_items(file);
  if (items.empty()) {
    throw PipelineOrderError("file " + file.file_name +
                             " has no function explanations to merge");
  }

  std::set<std::pair<std::string, std::string>> edges(file.function_dependencies.begin(),
                                                      file.function_dependencies.end());
  MergeConfig config;
  config.unit_id = file.file_name;
  config.level = Level::File;
  config.step = "file-merge";
  config.tmpl = &ctx.templates.get("file_merge");
  config.substitutions = {{"file_name", file.file_name}, {"program_id", file.program_id}};
  config.item_tag = "Function";
  config.context_tag = "Relationship";
  config.context_text = [&edges](const std::vector<MergeItem>& batch, int round) {
    if (round != 1) return std::string();
    std::set<std::string> in_batch;
    for (const auto& item : batch) in_batch.insert(item.name);
    std::string out;
    for (const auto& [caller, callee] : edges) {
      if (!in_batch.count(caller) || !in_batch.count(callee)) continue;
      if (!out.empty()) out += '\n';
      out += caller + " -> " + callee;
    }
    return out;
  };

  auto [text, sources] = hierarchical_merge(ctx, config, std::move(items));
  return make_explanation(file.file_name, Level::File, Status::Final, text,
                          std::move(sources));
}

Explanation explain_file(PipelineContext& ctx, const artifacts::FileArtifacts& file) {
  FileClass fc = classify_file(ctx, file);
  return fc.cls == FileClassKind::Short ? explain_file_short(ctx, file)
                                        : explain_file_long(ctx, file);
}

// ---------------------------------------------------------------------------
// Project pipeline

Explanation explain_project(PipelineContext& ctx, const artifacts::ProjectArtifacts& project) {
  std::vector<std::pair<int, std::string>> ordered;
  for (const auto& [file, expl] : project.file_explanations) {
    (void)expl;
    auto rank = project.topo_ranks.find(file);
    if (rank == project.topo_ranks.end()) {
      throw PipelineOrderError("file " + file + " has no topological rank");
    }
    ordered.emplace_back(rank->second, file);
  }
  std::sort(ordered.begin(), ordered.end());

  std::string structures;
  for (const auto& [rank, file] : ordered) {
    if (!structures.empty()) structures += '\n';
    structures += file + " (rank " + std::to_string(rank) + ")";
  }

  std::vector<MergeItem> items;
  for (const auto& [rank, file] : ordered) {
    (void)rank;
    items.push_back(MergeItem{file, project.file_explanations.at(file).text});
  }
  if (items.empty()) {
    throw PipelineOrderError("project " + project.project_name +
                             " has no file explanations to merge");
  }

  MergeConfig config;
  config.unit_id = project.project_name;
  config.level = Level::Project;
  config.step = "project-merge";
  config.tmpl = &ctx.templates.get("project_merge");
  config.substitutions = {{"project_name", project.project_name}};
  config.item_tag = "File";
  config.context_tag = "Structures";
  config.context_text = [&structures](const std::vector<MergeItem>& batch, int round) {
    (void)batch;
    (void)round;
    return structures;  // the full layout rides along in every prompt
  };

  auto [text, sources] = hierarchical_merge(ctx, config, std::move(items));
  return make_explanation(project.project_name, Level::Project, Status::Final, text,
                          std::move(sources));
}

// ---------------------------------------------------------------------------
// Whole-project runs

RunLevel run_level_from_name(const std::string& name) {
  if (name == "fn") return RunLevel::Functions;
  if (name == "file") return RunLevel::Files;
  if (name == "project") return RunLevel::Project;
  if (name == "all") return RunLevel::All;
  throw UsageError("unknown level '" + name + "' (expected fn, file, project, or all)");
}

namespace {

std::string default_project_name(const fs::path& root) {
  fs::path norm = fs::absolute(root).lexically_normal();
  if (norm.filename().empty() || norm.filename() == ".") norm = norm.parent_path();
  return norm.filename().string();
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

void write_outputs(const fs::path& out_dir, const ProjectRunResult& result) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "explanations.jsonl");
  if (!out) throw IoError("cannot write " + (out_dir / "explanations.jsonl").string());
  auto emit = [&out](const Explanation& e) {
    out << json{{"level", level_name(e.level)},
                {"sources", e.sources},
                {"status", status_name(e.status)},
                {"text", e.text},
                {"unit_id", e.unit_id},
                {"word_count", e.word_count}}
               .dump()
        << "\n";
  };
  for (const auto& [id, e] : result.function_explanations) {
    (void)id;
    emit(e);
  }
  for (const auto& [id, e] : result.file_explanations) {
    (void)id;
    emit(e);
  }
  if (result.project_explanation) emit(*result.project_explanation);
  out.close();
  result.manifest.write(out_dir / "manifest.json");
}

}  // namespace

ProjectRunResult run_project(agents::AgentClient& client, const agents::TemplateSet& templates,
                             const fs::path& root, const ProjectRunOptions& options) {
  ProjectRunResult result;
  result.project_name =
      options.project_name.empty() ? default_project_name(root) : options.project_name;
  result.report = artifacts::corpus_filter(root);
  if (!result.report.accepted) {
    std::string reasons;
    for (const auto& reason : result.report.reasons) {
      if (!reasons.empty()) reasons += "; ";
      reasons += reason;
    }
    throw Error("project " + result.project_name + " not accepted by the corpus filter: " +
                reasons);
  }

  client.reset_usage();
  result.manifest.set_project(result.project_name);
  result.manifest.set_config(options.config_echo);
  PipelineContext ctx{client, templates, options.pipeline, &result.manifest};

  bool want_files = options.level != RunLevel::Functions;
  bool want_project = options.level == RunLevel::Project || options.level == RunLevel::All;

  try {
    std::vector<fs::path> paths = cobol_files_under(root);
    std::vector<std::pair<std::string, cobol::Program>> programs;
    for (const auto& path : paths) {
      std::string rel = fs::relative(path, root).generic_string();
      programs.emplace_back(rel, cobol::parse_program(cobol::read_source_file(path)));
      result.files.push_back(rel);
    }

    std::map<std::string, std::map<std::string, Explanation>> per_file_finals;
    for (const auto& [rel, program] : programs) {
      std::map<std::string, Explanation> finals = explain_all_functions(ctx, program, rel);
      for (const auto& [name, explanation] : finals) {
        result.function_explanations.emplace(qualify(rel, name), explanation);
      }
      per_file_finals.emplace(rel, std::move(finals));
    }

    if (want_files) {
      for (const auto& [rel, program] : programs) {
        artifacts::FileArtifacts art = artifacts::file_artifacts(program, rel);
        art.function_explanations = per_file_finals.at(rel);
        result.file_explanations.emplace(rel, explain_file(ctx, art));
      }
    }

    if (want_project) {
      std::vector<std::pair<std::string, const cobol::Program*>> graph_input;
      for (const auto& [rel, program] : programs) graph_input.emplace_back(rel, &program);
      depgraph::DepGraph file_graph = depgraph::build_file_graph(graph_input);
      depgraph::Condensation condensation = depgraph::condense(file_graph);
      depgraph::TopoRanking ranking = depgraph::topo_ranks(condensation);

      artifacts::ProjectArtifacts project;
      project.project_name = result.project_name;
      project.file_dependencies.assign(file_graph.edges.begin(), file_graph.edges.end());
      for (const auto& [rel, program] : programs) {
        project.program_ids.emplace(rel, program.program_id.value_or(""));
      }
      project.file_explanations = result.file_explanations;
      project.topo_ranks = ranking.rank;
      result.project_explanation = explain_project(ctx, project);
    }
  } catch (...) {
    result.manifest.set_usage(client.usage());
    if (!options.out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(options.out_dir, ec);
      if (!ec) result.manifest.write(options.out_dir / "manifest.json");
    }
    throw;
  }

  for (const auto& [id, explanation] : result.function_explanations) {
    (void)id;
    result.manifest.add_explanation(explanation);
  }
  for (const auto& [id, explanation] : result.file_explanations) {
    (void)id;
    result.manifest.add_explanation(explanation);
  }
  if (result.project_explanation) result.manifest.add_explanation(*result.project_explanation);
  result.manifest.set_usage(client.usage());

  if (!options.out_dir.empty()) write_outputs(options.out_dir, result);
  return result;
}

}  // namespace cobexplain::pipeline
