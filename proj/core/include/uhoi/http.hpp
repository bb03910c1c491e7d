#pragma once

#include <chrono>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

namespace uhoi {

struct HttpEndpoint {
  std::string url;          // full URL, e.g. http://localhost:8000/v1/embed
  std::string api_key_env;  // env var holding a bearer token; empty = none
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};
};

// Delay before retry number `attempt` (0-based): base * 2^attempt, capped.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt);

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

// Throws ConfigError for anything that is not http:// or https://.
SplitUrl split_url(const std::string& url);

// POST a JSON body and parse the JSON reply. Connection failures, 408, 429
// and 5xx are retried with exponential backoff; other non-2xx statuses fail
// immediately. All failures raise TransportError prefixed with `context`.
nlohmann::json post_json(const HttpEndpoint& endpoint, const nlohmann::json& body,
                         const RetryPolicy& retry, const std::string& context);

// Test hook: replaces std::this_thread::sleep_for between retries.
void set_backoff_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

}  // namespace uhoi
