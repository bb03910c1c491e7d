#include "uhoi/http.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "uhoi/error.hpp"

namespace uhoi {

namespace {

std::mutex g_sleeper_mutex;
std::function<void(std::chrono::milliseconds)> g_sleeper;

void sleep_backoff(std::chrono::milliseconds delay) {
  std::function<void(std::chrono::milliseconds)> sleeper;
  {
    std::lock_guard lock(g_sleeper_mutex);
    sleeper = g_sleeper;
  }
  if (sleeper) {
    sleeper(delay);
  } else {
    std::this_thread::sleep_for(delay);
  }
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
  auto delay = policy.base_delay;
  for (int i = 0; i < attempt && delay < policy.max_delay; ++i) delay *= 2;
  return std::min(delay, policy.max_delay);
}

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("URL lacks a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

void set_backoff_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  std::lock_guard lock(g_sleeper_mutex);
  g_sleeper = std::move(sleeper);
}

nlohmann::json post_json(const HttpEndpoint& endpoint, const nlohmann::json& body,
                         const RetryPolicy& retry, const std::string& context) {
  const SplitUrl url = split_url(endpoint.url);
  httplib::Client client(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);

  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string payload = body.dump();

  std::string last_failure;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) sleep_backoff(backoff_delay(retry, attempt - 1));
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_failure = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(context + ": invalid JSON reply from " + endpoint.url + ": " +
                             e.what());
      }
    }
    last_failure = "HTTP " + std::to_string(res->status);
    if (!retryable_status(res->status)) {
      throw TransportError(context + ": " + endpoint.url + " answered " + last_failure);
    }
  }
  throw TransportError(context + ": " + endpoint.url + " failed after " +
                       std::to_string(retry.max_retries + 1) + " attempts: " + last_failure);
}

}  // namespace uhoi
