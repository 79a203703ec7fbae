#include "cobexplain/config.hpp"

#include <fstream>
#include <set>

#include "cobexplain/errors.hpp"

namespace cobexplain::config {

using nlohmann::json;

agents::RoleSet Config::role_set() const {
  agents::RoleSet roles;
  roles.code.token_limit = code_limit;
  roles.code.word_limit = word_limit;
  roles.text.token_limit = text_limit;
  roles.text.word_limit = word_limit;
  roles.judge.token_limit = judge_limit;
  return roles;
}

namespace {

json backend_json(const BackendConfig& backend) {
  json out = {{"kind", backend.kind}};
  if (backend.kind == "remote") {
    out["base_url"] = backend.endpoint.base_url;
    out["model"] = backend.endpoint.model;
    out["api_key_env"] = backend.endpoint.api_key_env;
  }
  return out;
}

}  // namespace

json Config::to_json() const {
  return json{
      {"backends",
       {{"code", backend_json(code)},
        {"embed", backend_json(embed)},
        {"judge", backend_json(judge)},
        {"text", backend_json(text)}}},
      {"cache_dir", cache_dir.string()},
      {"limits", {{"code", code_limit}, {"judge", judge_limit}, {"text", text_limit}}},
      {"max_in_flight", max_in_flight},
      {"seed", seed},
      {"templates_dir", templates_dir.string()},
      {"word_limit", word_limit},
  };
}

void validate(const Config& config) {
  if (config.code_limit <= 0 || config.text_limit <= 0 || config.judge_limit <= 0) {
    throw UsageError("token limits must be positive");
  }
  if (config.word_limit <= 0) throw UsageError("word_limit must be positive");
  if (config.max_in_flight <= 0) throw UsageError("max_in_flight must be positive");
  for (const BackendConfig* backend :
       {&config.code, &config.text, &config.judge, &config.embed}) {
    if (backend->kind != "mock" && backend->kind != "remote") {
      throw UsageError("backend kind must be 'mock' or 'remote', got '" + backend->kind + "'");
    }
    if (backend->kind == "remote" && backend->endpoint.base_url.empty()) {
      throw UsageError("remote backend needs a base_url");
    }
  }
}

namespace {

BackendConfig parse_backend(const json& node, const std::string& where) {
  static const std::set<std::string> known = {"kind", "base_url", "model", "api_key_env"};
  BackendConfig backend;
  if (!node.is_object()) throw UsageError(where + ": backend entry must be an object");
  for (const auto& [key, value] : node.items()) {
    (void)value;
    if (!known.count(key)) throw UsageError(where + ": unknown backend key '" + key + "'");
  }
  if (node.contains("kind")) backend.kind = node["kind"].get<std::string>();
  if (node.contains("base_url")) backend.endpoint.base_url = node["base_url"].get<std::string>();
  if (node.contains("model")) backend.endpoint.model = node["model"].get<std::string>();
  if (node.contains("api_key_env")) {
    backend.endpoint.api_key_env = node["api_key_env"].get<std::string>();
  }
  return backend;
}

}  // namespace

Config parse_config_json(const json& doc, const std::string& where) {
  static const std::set<std::string> known = {
      "backends", "cache_dir", "limits", "max_in_flight", "seed", "templates_dir", "word_limit",
  };
  if (!doc.is_object()) throw UsageError(where + ": config root must be an object");

  Config config;
  try {
    for (const auto& [key, value] : doc.items()) {
      (void)value;
      if (!known.count(key)) throw UsageError(where + ": unknown config key '" + key + "'");
    }
    if (doc.contains("backends")) {
      const json& backends = doc["backends"];
      if (!backends.is_object()) throw UsageError(where + ": 'backends' must be an object");
      for (const auto& [name, node] : backends.items()) {
        if (name == "code") {
          config.code = parse_backend(node, where);
        } else if (name == "text") {
          config.text = parse_backend(node, where);
        } else if (name == "judge") {
          config.judge = parse_backend(node, where);
        } else if (name == "embed") {
          config.embed = parse_backend(node, where);
        } else {
          throw UsageError(where + ": unknown backend '" + name + "'");
        }
      }
    }
    if (doc.contains("limits")) {
      const json& limits = doc["limits"];
      if (!limits.is_object()) throw UsageError(where + ": 'limits' must be an object");
      for (const auto& [name, node] : limits.items()) {
        if (name == "code") {
          config.code_limit = node.get<std::int64_t>();
        } else if (name == "text") {
          config.text_limit = node.get<std::int64_t>();
        } else if (name == "judge") {
          config.judge_limit = node.get<std::int64_t>();
        } else {
          throw UsageError(where + ": unknown limit '" + name + "'");
        }
      }
    }
    if (doc.contains("word_limit")) config.word_limit = doc["word_limit"].get<int>();
    if (doc.contains("templates_dir")) {
      config.templates_dir = doc["templates_dir"].get<std::string>();
    }
    if (doc.contains("cache_dir")) config.cache_dir = doc["cache_dir"].get<std::string>();
    if (doc.contains("max_in_flight")) config.max_in_flight = doc["max_in_flight"].get<int>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint32_t>();
  } catch (const json::exception& e) {
    throw UsageError(where + ": " + e.what());
  }

  validate(config);
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    // nlohmann reports "parse error at line L, column C" in what().
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return parse_config_json(doc, "config " + path.string());
}

}  // namespace cobexplain::config
