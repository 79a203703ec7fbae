#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlohmann/json.hpp"

namespace cobexplain::agents {

enum class RoleKind { CodeProcessing, TextProcessing, Judge };

const char* role_name(RoleKind kind);

struct AgentRole {
  RoleKind kind = RoleKind::CodeProcessing;
  std::int64_t token_limit = 0;
  std::optional<int> word_limit;
};

// Per-role budgets.  The code agent works under a small context window; the
// text and judge agents get a large one.
struct RoleSet {
  AgentRole code{RoleKind::CodeProcessing, 8192, 75};
  AgentRole text{RoleKind::TextProcessing, 128000, 75};
  AgentRole judge{RoleKind::Judge, 128000, std::nullopt};

  const AgentRole& for_kind(RoleKind kind) const;
  AgentRole& for_kind(RoleKind kind);
};

class TokenEstimator {
 public:
  virtual ~TokenEstimator() = default;
  virtual std::int64_t estimate(std::string_view text) const = 0;
};

// ceil(byte_length / 4); zero only for empty input.
class ByteRatioEstimator : public TokenEstimator {
 public:
  std::int64_t estimate(std::string_view text) const override;
};

std::int64_t estimate_tokens(std::string_view text);

std::string sha256_hex(std::string_view data);

// ---------------------------------------------------------------------------
// Prompt templates

struct Slot {
  std::string tag;
  bool required = false;
};

struct PromptTemplate {
  std::string name;
  RoleKind role = RoleKind::CodeProcessing;
  std::string system_text;
  std::string instruction;  // may contain {placeholders}
  std::vector<Slot> slots;
};

// Ordered (tag, text) pairs; a tag may repeat.
using Bindings = std::vector<std::pair<std::string, std::string>>;

// Substitutes {placeholders} in the instruction, then appends one
// <Tag>...</Tag> pair per binding in template slot order.  An unbound
// required slot, or a binding without a matching slot, raises TemplateError.
std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings,
                          const std::map<std::string, std::string>& substitutions = {});

class TemplateSet {
 public:
  const PromptTemplate& get(const std::string& name) const;
  void put(PromptTemplate tmpl);
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

TemplateSet builtin_templates();
// Builtins overlaid with any *.tmpl files found in dir.
TemplateSet load_templates(const std::filesystem::path& dir);
PromptTemplate parse_template_text(const std::string& name, const std::string& text);
std::string template_to_text(const PromptTemplate& tmpl);

// ---------------------------------------------------------------------------
// Backends

struct CompletionRequest {
  RoleKind role = RoleKind::CodeProcessing;
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  std::optional<int> max_output_tokens;
};

struct CompletionResponse {
  std::string text;
  std::string backend_id;
  std::string cache_key;
  bool cached = false;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual std::string model() const = 0;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// Deterministic offline stand-in.  Response text is derived from a hash of
// the request; a user line "ECHO: ..." is echoed back verbatim, and
// judge-shaped prompts get well-formed score/winner lines.
class MockBackend : public Backend {
 public:
  std::string id() const override { return "mock"; }
  std::string model() const override { return "mock"; }
  std::string complete(const CompletionRequest& request) override;
};

struct RemoteEndpoint {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string model;
  std::string api_key_env = "COBEXPLAIN_API_KEY";
};

// POSTs {base_url}/chat/completions with retry and exponential backoff.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteEndpoint endpoint, int max_attempts = 3,
                         int base_delay_ms = 250);
  std::string id() const override;
  std::string model() const override { return endpoint_.model; }
  std::string complete(const CompletionRequest& request) override;

 private:
  RemoteEndpoint endpoint_;
  int max_attempts_;
  int base_delay_ms_;
};

// ---------------------------------------------------------------------------
// Response cache

// Content-addressed store of completions under a directory, one JSON file
// per request hash.  Entries are never overwritten.
class ResponseCache {
 public:
  ResponseCache() = default;  // disabled
  explicit ResponseCache(std::filesystem::path dir);

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& dir() const { return dir_; }

  static std::string key_for(const std::string& backend_id, const std::string& model,
                             RoleKind role, const std::string& system_text,
                             const std::string& user_text, double temperature);

  std::optional<nlohmann::json> lookup(const std::string& key) const;
  void store(const std::string& key, const nlohmann::json& entry);

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

// ---------------------------------------------------------------------------
// Client

struct Usage {
  std::int64_t requests = 0;
  std::int64_t backend_calls = 0;
  std::int64_t cache_hits = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

// Routes completion requests to the role's backend, enforcing the role's
// token budget before dispatch and consulting the response cache.
class AgentClient {
 public:
  explicit AgentClient(RoleSet roles = {}, std::filesystem::path cache_dir = {});

  void set_backend(RoleKind kind, std::shared_ptr<Backend> backend);
  void set_backend_all(std::shared_ptr<Backend> backend);
  void set_estimator(std::shared_ptr<const TokenEstimator> estimator);

  const RoleSet& roles() const { return roles_; }
  RoleSet& roles() { return roles_; }
  const ResponseCache& cache() const { return cache_; }

  // unit names the work item for error messages.
  CompletionResponse complete(const CompletionRequest& request, const std::string& unit = {});

  std::int64_t prompt_estimate(const CompletionRequest& request) const;

  std::map<std::string, Usage> usage() const;
  void reset_usage();

 private:
  Backend& backend_for(RoleKind kind) const;

  RoleSet roles_;
  ResponseCache cache_;
  std::map<RoleKind, std::shared_ptr<Backend>> backends_;
  std::shared_ptr<const TokenEstimator> estimator_;
  mutable std::mutex mutex_;
  std::map<RoleKind, Usage> usage_;
};

// ---------------------------------------------------------------------------
// Judge replies

enum class Winner { A, B, Tie };

const char* winner_name(Winner winner);

struct JudgeScores {
  std::map<std::string, int> criterion_scores;
  std::optional<Winner> winner;
  std::optional<bool> conceptually_similar;
};

// Extracts "CRITERION: score" lines (0-10) and an optional "WINNER: A|B|Tie"
// line.  Scores outside the range or missing criteria raise JudgeParseError.
JudgeScores judge_score_parse(const std::string& raw,
                              const std::vector<std::string>& criteria);

}  // namespace cobexplain::agents
