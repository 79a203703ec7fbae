#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cobexplain/agents.hpp"
#include "nlohmann/json.hpp"

namespace cobexplain::config {

// One chat or embedding backend slot.
struct BackendConfig {
  std::string kind = "mock";  // mock | remote
  agents::RemoteEndpoint endpoint;
};

struct Config {
  BackendConfig code;
  BackendConfig text;
  BackendConfig judge;
  BackendConfig embed;

  std::int64_t code_limit = 8192;
  std::int64_t text_limit = 128000;
  std::int64_t judge_limit = 128000;
  int word_limit = 75;

  std::filesystem::path templates_dir;
  std::filesystem::path cache_dir = ".cobexplain-cache";
  int max_in_flight = 4;
  std::uint32_t seed = 0;

  agents::RoleSet role_set() const;
  nlohmann::json to_json() const;
};

// Checks limits and counts are positive; throws UsageError otherwise.
void validate(const Config& config);

// Built-in defaults overlaid with the JSON file.  Unknown keys are rejected;
// parse failures surface as UsageError with the parser's line/column text.
Config load_config(const std::filesystem::path& path);

Config parse_config_json(const nlohmann::json& doc, const std::string& where);

}  // namespace cobexplain::config
