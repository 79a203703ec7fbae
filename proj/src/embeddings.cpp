#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "cobexplain/errors.hpp"
#include "cobexplain/eval.hpp"
#include "httplib.h"
#include "nlohmann/json.hpp"

namespace cobexplain::eval {

using nlohmann::json;

PrecomputedEmbeddings::PrecomputedEmbeddings(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read embedding file " + file.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError(file.string() + ":" + std::to_string(number) + ": " + e.what());
    }
    std::string key;
    if (entry.contains("id")) {
      key = entry["id"].get<std::string>();
    } else if (entry.contains("text")) {
      key = entry["text"].get<std::string>();
    } else {
      throw IoError(file.string() + ":" + std::to_string(number) +
                    ": entry has neither 'id' nor 'text'");
    }
    vectors_[key] = entry.at("vector").get<std::vector<double>>();
  }
}

std::vector<double> PrecomputedEmbeddings::embed(const std::string& key) {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw NotFoundError("no precomputed embedding for '" + key + "'");
  return it->second;
}

RemoteEmbedder::RemoteEmbedder(agents::RemoteEndpoint endpoint, int max_attempts,
                               int base_delay_ms)
    : endpoint_(std::move(endpoint)),
      max_attempts_(max_attempts),
      base_delay_ms_(base_delay_ms) {}

std::vector<double> RemoteEmbedder::embed(const std::string& key) {
  std::size_t scheme = endpoint_.base_url.find("://");
  if (scheme == std::string::npos) {
    throw BackendError("base_url must start with http:// or https://: " + endpoint_.base_url);
  }
  std::size_t slash = endpoint_.base_url.find('/', scheme + 3);
  std::string origin =
      slash == std::string::npos ? endpoint_.base_url : endpoint_.base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : endpoint_.base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  json body = {{"model", endpoint_.model}, {"input", key}};
  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    const char* api_key = std::getenv(endpoint_.api_key_env.c_str());
    if (api_key == nullptr) {
      throw BackendError("environment variable " + endpoint_.api_key_env +
                         " is not set but a remote embedder was invoked");
    }
    headers.emplace("Authorization", std::string("Bearer ") + api_key);
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
        client.Post(prefix + "/embeddings", headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("embedding request failed with status " +
                         std::to_string(res->status) + ": " + res->body);
    }
    try {
      json reply = json::parse(res->body);
      return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed embedding response: ") + e.what());
    }
  }
  throw BackendError("embedding request failed after " + std::to_string(max_attempts_) +
                     " attempts (" + last_error + ")");
}

}  // namespace cobexplain::eval
