#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "cobexplain/agents.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "cobexplain/errors.hpp"
#include "httplib.h"

namespace cobexplain::agents {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string now_iso8601() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* role_name(RoleKind kind) {
  switch (kind) {
    case RoleKind::CodeProcessing: return "CodeProcessing";
    case RoleKind::TextProcessing: return "TextProcessing";
    case RoleKind::Judge: return "Judge";
  }
  return "CodeProcessing";
}

const AgentRole& RoleSet::for_kind(RoleKind kind) const {
  switch (kind) {
    case RoleKind::CodeProcessing: return code;
    case RoleKind::TextProcessing: return text;
    case RoleKind::Judge: return judge;
  }
  return code;
}

AgentRole& RoleSet::for_kind(RoleKind kind) {
  return const_cast<AgentRole&>(static_cast<const RoleSet*>(this)->for_kind(kind));
}

std::int64_t ByteRatioEstimator::estimate(std::string_view text) const {
  return (static_cast<std::int64_t>(text.size()) + 3) / 4;
}

std::int64_t estimate_tokens(std::string_view text) {
  static const ByteRatioEstimator estimator;
  return estimator.estimate(text);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Templates

std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings,
                          const std::map<std::string, std::string>& substitutions) {
  std::string text = tmpl.instruction;
  for (const auto& [key, value] : substitutions) {
    std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
      text.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }

  for (const auto& [tag, value] : bindings) {
    (void)value;
    bool known = std::any_of(tmpl.slots.begin(), tmpl.slots.end(),
                             [&](const Slot& slot) { return slot.tag == tag; });
    if (!known) {
      throw TemplateError("template '" + tmpl.name + "' has no slot '" + tag + "'");
    }
  }
  for (const auto& slot : tmpl.slots) {
    if (!slot.required) continue;
    bool bound = std::any_of(bindings.begin(), bindings.end(),
                             [&](const auto& b) { return b.first == slot.tag; });
    if (!bound) {
      throw TemplateError("required slot '" + slot.tag + "' unbound in template '" +
                          tmpl.name + "'");
    }
  }

  std::string out = text;
  for (const auto& slot : tmpl.slots) {
    for (const auto& [tag, value] : bindings) {
      if (tag != slot.tag) continue;
      out += "\n\n<" + tag + ">\n" + value + "\n</" + tag + ">";
    }
  }
  return out;
}

const PromptTemplate& TemplateSet::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError("no template named '" + name + "'");
  return it->second;
}

void TemplateSet::put(PromptTemplate tmpl) {
  templates_[tmpl.name] = std::move(tmpl);
}

std::vector<std::string> TemplateSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, tmpl] : templates_) {
    (void)tmpl;
    out.push_back(name);
  }
  return out;
}

namespace {

RoleKind role_from_text(const std::string& value, const std::string& where) {
  std::string u = upper(trim(value));
  if (u == "CODE") return RoleKind::CodeProcessing;
  if (u == "TEXT") return RoleKind::TextProcessing;
  if (u == "JUDGE") return RoleKind::Judge;
  throw TemplateError(where + ": unknown role '" + value + "'");
}

const char* role_to_text(RoleKind kind) {
  switch (kind) {
    case RoleKind::CodeProcessing: return "code";
    case RoleKind::TextProcessing: return "text";
    case RoleKind::Judge: return "judge";
  }
  return "code";
}

std::string strip_trailing_blank(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
  return text;
}

}  // namespace

PromptTemplate parse_template_text(const std::string& name, const std::string& text) {
  PromptTemplate tmpl;
  tmpl.name = name;
  std::string section;
  std::string system_text;
  std::string instruction;
  bool have_role = false;

  for (const auto& line : split_lines(text)) {
    std::string t = trim(line);
    if (section.empty() && (t.empty() || t[0] == '#')) continue;
    if (!t.empty() && t.front() == '[' && t.back() == ']') {
      section = upper(t.substr(1, t.size() - 2));
      continue;
    }
    if (section.empty()) {
      if (t.rfind("role:", 0) == 0) {
        tmpl.role = role_from_text(t.substr(5), name);
        have_role = true;
        continue;
      }
      throw TemplateError(name + ": expected 'role:' or a [section] header, got '" + t + "'");
    }
    if (section == "SYSTEM") {
      system_text += line;
      system_text += '\n';
    } else if (section == "INSTRUCTION") {
      instruction += line;
      instruction += '\n';
    } else if (section == "SLOTS") {
      if (t.empty() || t[0] == '#') continue;
      std::istringstream in(t);
      std::string tag;
      std::string kind;
      in >> tag >> kind;
      std::string u = upper(kind);
      if (tag.empty() || (u != "REQUIRED" && u != "OPTIONAL")) {
        throw TemplateError(name + ": bad slot line '" + t + "'");
      }
      tmpl.slots.push_back(Slot{tag, u == "REQUIRED"});
    } else {
      throw TemplateError(name + ": unknown section [" + section + "]");
    }
  }
  if (!have_role) throw TemplateError(name + ": missing 'role:' line");
  tmpl.system_text = strip_trailing_blank(system_text);
  tmpl.instruction = strip_trailing_blank(instruction);
  return tmpl;
}

std::string template_to_text(const PromptTemplate& tmpl) {
  std::ostringstream out;
  out << "# Default structural template; edit freely and load with --templates.\n";
  out << "role: " << role_to_text(tmpl.role) << "\n\n";
  out << "[system]\n" << tmpl.system_text << "\n\n";
  out << "[instruction]\n" << tmpl.instruction << "\n\n";
  out << "[slots]\n";
  for (const auto& slot : tmpl.slots) {
    out << slot.tag << " " << (slot.required ? "required" : "optional") << "\n";
  }
  return out.str();
}

TemplateSet builtin_templates() {
  TemplateSet set;

  set.put(PromptTemplate{
      "function_step1",
      RoleKind::CodeProcessing,
      "You are a COBOL analyst. You explain what code does in plain, precise prose.",
      "Explain what the following COBOL function does, in at most {word_limit} words. "
      "Describe its purpose, how it uses the variables listed in <Variable>, and how it "
      "relies on the functions named in <CalledFunctions>. Respond with prose only.",
      {{"Code", true}, {"Variable", true}, {"CalledFunctions", false}}});

  set.put(PromptTemplate{
      "function_step2",
      RoleKind::TextProcessing,
      "You are a technical editor who refines draft documentation of COBOL code.",
      "Rewrite the draft explanation in <Main> so a reader can follow it without the "
      "source code, in at most {word_limit} words. Each <Term> entry gives the name of a "
      "called function and its explanation; fold the parts that matter into the result. "
      "Respond with prose only.",
      {{"Main", true}, {"Term", false}}});

  set.put(PromptTemplate{
      "file_short",
      RoleKind::CodeProcessing,
      "You are a COBOL analyst. You explain what code does in plain, precise prose.",
      "Program {program_id} in file {file_name}.\n"
      "Summarize what this COBOL file does from its PROCEDURE DIVISION in <Code> and the "
      "declared variables in <Variable>. Cover its purpose and main processing steps. "
      "Respond with prose only.",
      {{"Code", true}, {"Variable", true}}});

  set.put(PromptTemplate{
      "file_merge",
      RoleKind::TextProcessing,
      "You are a technical editor who consolidates documentation of COBOL code.",
      "Program {program_id} in file {file_name}.\n"
      "Combine the explanations below into one description of this file. Each <Function> "
      "entry gives a function name and its explanation; <Relationship> lists caller -> "
      "callee pairs among them. Preserve how the functions relate to each other. Respond "
      "with prose only.",
      {{"Function", true}, {"Relationship", true}}});

  set.put(PromptTemplate{
      "project_merge",
      RoleKind::TextProcessing,
      "You are a technical editor who consolidates documentation of COBOL systems.",
      "Project {project_name}.\n"
      "Combine the file explanations below into one description of the whole project. "
      "Each <File> entry gives a file name and its explanation; <Structures> lists every "
      "file with its dependency rank, where rank 0 means no other file calls it. Respond "
      "with prose only.",
      {{"File", true}, {"Structures", true}}});

  set.put(PromptTemplate{
      "judge_pair",
      RoleKind::Judge,
      "You are an impartial reviewer of code documentation.",
      "Compare the candidate explanations in <ExplanationA> and <ExplanationB> against "
      "the reference description in <Reference>.\n"
      "Criteria: {criteria}\n"
      "For each criterion output exactly one line 'NAME: score', where score is an "
      "integer from 0 to 10 rating the stronger candidate on that criterion. Finish "
      "with exactly one line 'WINNER: A', 'WINNER: B', or 'WINNER: Tie'.",
      {{"Reference", true}, {"ExplanationA", true}, {"ExplanationB", true}}});

  set.put(PromptTemplate{
      "judge_project",
      RoleKind::Judge,
      "You are an impartial reviewer of software documentation.",
      "Compare the candidate project descriptions in <ExplanationA> and <ExplanationB> "
      "against the reference description in <Reference>.\n"
      "Output exactly one line 'CONCEPTUALLY_SIMILAR: Yes' or 'CONCEPTUALLY_SIMILAR: No' "
      "stating whether the two candidates are conceptually similar, then exactly one "
      "line 'WINNER: A', 'WINNER: B', or 'WINNER: Tie' naming the better description.",
      {{"Reference", true}, {"ExplanationA", true}, {"ExplanationB", true}}});

  return set;
}

TemplateSet load_templates(const fs::path& dir) {
  TemplateSet set = builtin_templates();
  if (dir.empty()) return set;
  if (!fs::exists(dir) || !fs::is_directory(dir)) {
    throw IoError("template directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tmpl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    set.put(parse_template_text(path.stem().string(), buf.str()));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Mock backend

namespace {

// Rendered slots put the tag on its own line; instructions that merely
// mention "<Tag>" inline must not match.
std::string extract_tag(const std::string& text, const std::string& tag) {
  std::string open = "<" + tag + ">\n";
  std::string close = "\n</" + tag + ">";
  std::size_t a = text.find(open);
  if (a == std::string::npos) return std::string();
  a += open.size();
  std::size_t b = text.find(close, a);
  if (b == std::string::npos) return std::string();
  return trim(text.substr(a, b - a));
}

int hash_byte(const std::string& hex_digest, std::size_t index) {
  std::size_t pos = (index * 2) % hex_digest.size();
  return std::stoi(hex_digest.substr(pos, 2), nullptr, 16);
}

}  // namespace

std::string MockBackend::complete(const CompletionRequest& request) {
  for (const auto& line : split_lines(request.user_text)) {
    std::string t = trim(line);
    if (t.rfind("ECHO: ", 0) == 0) return t.substr(6);
  }

  std::ostringstream seed;
  seed << role_name(request.role) << '\x1f' << request.system_text << '\x1f'
       << request.user_text << '\x1f' << request.temperature;
  std::string digest = sha256_hex(seed.str());

  if (request.user_text.find("<ExplanationA>") != std::string::npos) {
    std::ostringstream out;
    for (const auto& line : split_lines(request.user_text)) {
      std::string t = trim(line);
      if (t.rfind("Criteria:", 0) != 0) continue;
      std::istringstream names(t.substr(9));
      std::string criterion;
      std::size_t index = 0;
      while (std::getline(names, criterion, ',')) {
        out << trim(criterion) << ": " << hash_byte(digest, index++) % 11 << "\n";
      }
      break;
    }
    if (request.user_text.find("CONCEPTUALLY_SIMILAR") != std::string::npos) {
      out << "CONCEPTUALLY_SIMILAR: " << (hash_byte(digest, 14) % 2 == 0 ? "Yes" : "No")
          << "\n";
    }
    std::string a = extract_tag(request.user_text, "ExplanationA");
    std::string b = extract_tag(request.user_text, "ExplanationB");
    if (a == b) {
      out << "WINNER: Tie";
    } else {
      out << "WINNER: " << (hash_byte(digest, 15) % 2 == 0 ? "A" : "B");
    }
    return out.str();
  }

  std::size_t inputs = 0;
  for (std::size_t pos = request.user_text.find("</"); pos != std::string::npos;
       pos = request.user_text.find("</", pos + 2)) {
    ++inputs;
  }
  std::ostringstream out;
  out << "Mock " << role_to_text(request.role) << " summary " << digest.substr(0, 12)
      << " covering " << inputs << " inputs.";
  return out.str();
}

// ---------------------------------------------------------------------------
// Remote backend

RemoteBackend::RemoteBackend(RemoteEndpoint endpoint, int max_attempts, int base_delay_ms)
    : endpoint_(std::move(endpoint)),
      max_attempts_(max_attempts),
      base_delay_ms_(base_delay_ms) {}

std::string RemoteBackend::id() const {
  return "remote:" + endpoint_.model;
}

namespace {

// Splits http(s)://host[:port]/prefix into origin and prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  std::size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw BackendError("base_url must start with http:// or https://: " + base_url);
  }
  std::size_t slash = base_url.find('/', scheme + 3);
  if (slash == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, slash), prefix};
}

}  // namespace

std::string RemoteBackend::complete(const CompletionRequest& request) {
  auto [origin, prefix] = split_base_url(endpoint_.base_url);

  json body = {
      {"model", endpoint_.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", request.system_text}},
                    {{"role", "user"}, {"content", request.user_text}}})},
      {"temperature", request.temperature},
  };
  if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;
  std::string payload = body.dump();

  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (key == nullptr) {
      throw BackendError("environment variable " + endpoint_.api_key_env +
                         " is not set but a remote backend was invoked");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(base_delay_ms_) << (attempt - 1)));
    }
    httplib::Client client(origin);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Result res =
        client.Post(prefix + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("chat completion failed with status " + std::to_string(res->status) +
                         ": " + res->body);
    }
    try {
      json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw BackendError("chat completion failed after " + std::to_string(max_attempts_) +
                     " attempts (" + last_error + ")");
}

// ---------------------------------------------------------------------------
// Response cache

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

std::string ResponseCache::key_for(const std::string& backend_id, const std::string& model,
                                   RoleKind role, const std::string& system_text,
                                   const std::string& user_text, double temperature) {
  json canonical = {
      {"backend_id", backend_id}, {"model", model},           {"role", role_name(role)},
      {"system", system_text},    {"temperature", temperature}, {"user", user_text},
  };
  return sha256_hex(canonical.dump());
}

std::optional<json> ResponseCache::lookup(const std::string& key) const {
  if (!enabled()) return std::nullopt;
  fs::path path = dir_ / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    json entry;
    in >> entry;
    return entry;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const json& entry) {
  if (!enabled()) return;
  std::lock_guard<std::mutex> lock(write_mutex_);
  fs::path path = dir_ / (key + ".json");
  if (fs::exists(path)) return;  // append-only
  fs::path tmp = dir_ / (key + ".json.tmp");
  {
    std::ofstream out(tmp);
    out << entry.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Client

AgentClient::AgentClient(RoleSet roles, fs::path cache_dir)
    : roles_(roles),
      cache_(std::move(cache_dir)),
      estimator_(std::make_shared<ByteRatioEstimator>()) {}

void AgentClient::set_backend(RoleKind kind, std::shared_ptr<Backend> backend) {
  backends_[kind] = std::move(backend);
}

void AgentClient::set_backend_all(std::shared_ptr<Backend> backend) {
  backends_[RoleKind::CodeProcessing] = backend;
  backends_[RoleKind::TextProcessing] = backend;
  backends_[RoleKind::Judge] = std::move(backend);
}

void AgentClient::set_estimator(std::shared_ptr<const TokenEstimator> estimator) {
  estimator_ = std::move(estimator);
}

Backend& AgentClient::backend_for(RoleKind kind) const {
  auto it = backends_.find(kind);
  if (it == backends_.end() || it->second == nullptr) {
    throw BackendError(std::string("no backend configured for role ") + role_name(kind));
  }
  return *it->second;
}

std::int64_t AgentClient::prompt_estimate(const CompletionRequest& request) const {
  return estimator_->estimate(request.user_text);
}

CompletionResponse AgentClient::complete(const CompletionRequest& request,
                                         const std::string& unit) {
  const AgentRole& role = roles_.for_kind(request.role);
  std::int64_t estimate = estimator_->estimate(request.user_text);
  if (estimate > role.token_limit) {
    throw TokenLimitExceededError(estimate, role.token_limit, unit);
  }

  Backend& backend = backend_for(request.role);
  std::string key = ResponseCache::key_for(backend.id(), backend.model(), request.role,
                                           request.system_text, request.user_text,
                                           request.temperature);

  CompletionResponse response;
  response.backend_id = backend.id();
  response.cache_key = key;
  response.prompt_tokens = estimate;

  if (auto entry = cache_.lookup(key)) {
    response.text = entry->at("text").get<std::string>();
    response.cached = true;
  } else {
    response.text = backend.complete(request);
    response.cached = false;
    if (cache_.enabled()) {
      json entry = {
          {"backend_id", backend.id()},
          {"created_at", now_iso8601()},
          {"model", backend.model()},
          {"role", role_name(request.role)},
          {"system", request.system_text},
          {"temperature", request.temperature},
          {"text", response.text},
          {"user", request.user_text},
      };
      cache_.store(key, entry);
    }
  }
  response.completion_tokens = estimator_->estimate(response.text);

  {
    std::lock_guard<std::mutex> lock(mutex_);
    Usage& usage = usage_[request.role];
    ++usage.requests;
    usage.prompt_tokens += response.prompt_tokens;
    usage.completion_tokens += response.completion_tokens;
    if (response.cached) {
      ++usage.cache_hits;
    } else {
      ++usage.backend_calls;
    }
  }
  return response;
}

std::map<std::string, Usage> AgentClient::usage() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::map<std::string, Usage> out;
  for (const auto& [kind, usage] : usage_) {
    out[role_name(kind)] = usage;
  }
  return out;
}

void AgentClient::reset_usage() {
  std::lock_guard<std::mutex> lock(mutex_);
  usage_.clear();
}

// ---------------------------------------------------------------------------
// Judge replies

const char* winner_name(Winner winner) {
  switch (winner) {
    case Winner::A: return "A";
    case Winner::B: return "B";
    case Winner::Tie: return "Tie";
  }
  return "Tie";
}

JudgeScores judge_score_parse(const std::string& raw,
                              const std::vector<std::string>& criteria) {
  JudgeScores scores;
  std::map<std::string, std::string> wanted;  // folded -> canonical
  for (const auto& criterion : criteria) wanted.emplace(upper(criterion), criterion);

  for (const auto& line : split_lines(raw)) {
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string head = upper(trim(line.substr(0, colon)));
    std::string tail = trim(line.substr(colon + 1));

    if (head == "WINNER") {
      std::string token = upper(tail);
      if (token == "A") {
        scores.winner = Winner::A;
      } else if (token == "B") {
        scores.winner = Winner::B;
      } else if (token == "TIE") {
        scores.winner = Winner::Tie;
      } else {
        throw JudgeParseError("unrecognized winner token '" + tail + "'", raw);
      }
      continue;
    }
    if (head == "CONCEPTUALLY_SIMILAR") {
      std::string token = upper(tail);
      if (token == "YES") {
        scores.conceptually_similar = true;
      } else if (token == "NO") {
        scores.conceptually_similar = false;
      } else {
        throw JudgeParseError("unrecognized similarity token '" + tail + "'", raw);
      }
      continue;
    }

    auto it = wanted.find(head);
    if (it == wanted.end()) continue;
    if (scores.criterion_scores.count(it->second)) continue;  // first occurrence wins
    if (tail.empty() ||
        !std::all_of(tail.begin(), tail.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
      throw JudgeParseError("non-integer score for " + it->second + ": '" + tail + "'", raw);
    }
    int value = std::stoi(tail);
    if (value < 0 || value > 10) {
      throw JudgeParseError("score out of range 0-10 for " + it->second + ": " + tail, raw);
    }
    scores.criterion_scores[it->second] = value;
  }

  std::string missing;
  for (const auto& criterion : criteria) {
    if (!scores.criterion_scores.count(criterion)) {
      if (!missing.empty()) missing += ", ";
      missing += criterion;
    }
  }
  if (!missing.empty()) {
    throw JudgeParseError("missing criteria: " + missing, raw);
  }
  return scores;
}

}  // namespace cobexplain::agents
