#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/http.hpp"
#include "uhoi/similarity.hpp"

namespace uhoi {

enum class PromptKind { kDirect, kCot, kDescriptive, kStructured };

std::string to_string(PromptKind kind);
PromptKind parse_prompt_kind(std::string_view name);

// Substitutes the object label into the question template for `kind`.
// Throws ValidationError for an empty label.
std::string render_prompt(PromptKind kind, std::string_view object_label);

struct GenerationRequest {
  std::string pair_id;
  std::vector<std::uint8_t> image_png;  // empty for text-only calls
  std::string prompt;
  double temperature = 0.2;
  int max_tokens = 2048;
  int num_samples = 1;
  std::optional<std::uint64_t> seed;  // honoured by the mock provider only

  void validate() const;
};

struct GenerationResponse {
  std::vector<std::string> texts;  // texts[i] is sample i
  std::string model_id;
  std::chrono::milliseconds latency{0};
};

class GenerationProvider {
 public:
  virtual ~GenerationProvider() = default;
  // Must be safe to call from several threads at once.
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
  virtual std::string describe() const = 0;
};

// Validates the request, calls the provider and checks that exactly
// num_samples texts came back.
GenerationResponse generate(const GenerationRequest& request, GenerationProvider& provider);

// Canned replies: pair_id -> candidate texts, sampled with replacement by a
// seeded xoshiro256** stream derived from (seed, pair_id). The key "*" is a
// fallback pool for pairs without their own entry.
class MockGenerationProvider final : public GenerationProvider {
 public:
  explicit MockGenerationProvider(std::map<std::string, std::vector<std::string>> pool,
                                  std::uint64_t default_seed = 0);
  // JSON object: { "<pair_id>": ["text", ...], ... }
  static MockGenerationProvider load(const std::string& path, std::uint64_t default_seed = 0);

  GenerationResponse generate(const GenerationRequest& request) override;
  std::string describe() const override { return "mock"; }

 private:
  std::map<std::string, std::vector<std::string>> pool_;
  std::uint64_t default_seed_;
};

// Keep the first `max_tokens` whitespace-separated tokens.
std::string truncate_tokens(std::string_view text, int max_tokens);

struct ChatCompletionsConfig {
  HttpEndpoint endpoint;
  std::string model;
  bool supports_n = true;  // false: issue n single-sample calls
  RetryPolicy retry;
};

// OpenAI-style chat completions: one user message holding a base64 PNG
// image part and a text part. Also answers plain yes/no questions for the
// verb pre-filter.
class ChatCompletionsProvider final : public GenerationProvider, public YesNoProvider {
 public:
  explicit ChatCompletionsProvider(ChatCompletionsConfig config);

  GenerationResponse generate(const GenerationRequest& request) override;
  std::string ask(const std::string& question) override;
  std::string describe() const override { return "chat:" + config_.endpoint.url; }

  static nlohmann::json build_body(const std::string& model, const GenerationRequest& request,
                                   int n);
  // choices[i].message.content; null/missing content (refusals) become "".
  static std::vector<std::string> parse_choices(const nlohmann::json& reply);

 private:
  ChatCompletionsConfig config_;
};

// verb -> reply, for tests and offline runs of the verb pre-filter.
class MockYesNoProvider final : public YesNoProvider {
 public:
  explicit MockYesNoProvider(std::map<std::string, std::string> replies);
  static MockYesNoProvider load(const std::string& path);
  std::string ask(const std::string& question) override;

 private:
  std::map<std::string, std::string> replies_;
};

// Tracks current and peak concurrent calls.
class ConcurrencyGauge {
 public:
  void enter();
  void leave();
  std::size_t current() const { return current_.load(); }
  std::size_t peak() const { return peak_.load(); }

 private:
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> peak_{0};
};

// Runs requests with at most `max_in_flight` concurrent provider calls.
// `on_ready(i, response)` is invoked on the calling thread strictly in
// request order. On the first failure no new requests are started, the
// responses preceding it are still delivered, and a TransportError naming
// the pair is thrown.
void generate_all(std::span<const GenerationRequest> requests, GenerationProvider& provider,
                  std::size_t max_in_flight,
                  const std::function<void(std::size_t, GenerationResponse&)>& on_ready,
                  ConcurrencyGauge* gauge = nullptr);

}  // namespace uhoi
