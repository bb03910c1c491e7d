#include "uhoi/generation.hpp"

#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>

#include "uhoi/datamodel.hpp"
#include "uhoi/error.hpp"
#include "uhoi/image.hpp"
#include "uhoi/rng.hpp"
#include "uhoi/text.hpp"

namespace uhoi {

namespace {

constexpr std::string_view kQuestionHead = "What are the interactions between the person and the ";

}  // namespace

std::string to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::kDirect: return "direct";
    case PromptKind::kCot: return "cot";
    case PromptKind::kDescriptive: return "descriptive";
    case PromptKind::kStructured: return "structured";
  }
  return "direct";
}

PromptKind parse_prompt_kind(std::string_view name) {
  for (auto kind : {PromptKind::kDirect, PromptKind::kCot, PromptKind::kDescriptive,
                    PromptKind::kStructured}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown prompt kind '" + std::string(name) +
                    "' (direct|cot|descriptive|structured)");
}

std::string render_prompt(PromptKind kind, std::string_view object_label) {
  const std::string obj(object_label);
  if (trim(obj).empty()) throw ValidationError("prompt object label is empty");
  const std::string direct = std::string(kQuestionHead) + obj + "?";
  switch (kind) {
    case PromptKind::kDirect:
      return direct;
    case PromptKind::kCot:
      return direct + " Think step by step.";
    case PromptKind::kDescriptive:
      return "Describe all the interactions occurring between the person and the " + obj +
             ". If no interactions are being performed reply with \"no interaction\".";
    case PromptKind::kStructured:
      return direct + " Answer the question with triplets of the form: (person, verb, " + obj +
             "). Examples: \"(person, sit on, bike). (person, ride, bike)\". If there are no "
             "interactions, answer with (person, none, " + obj + "). Do not write any other text.";
  }
  return direct;
}

void GenerationRequest::validate() const {
  if (max_tokens <= 0) throw ConfigError("max_tokens must be > 0");
  if (num_samples < 1) throw ConfigError("num_samples must be >= 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (prompt.empty()) throw ConfigError("generation prompt is empty");
}

GenerationResponse generate(const GenerationRequest& request, GenerationProvider& provider) {
  request.validate();
  GenerationResponse response = provider.generate(request);
  if (response.texts.size() != static_cast<std::size_t>(request.num_samples)) {
    throw TransportError("pair " + request.pair_id + ": provider returned " +
                         std::to_string(response.texts.size()) + " texts, expected " +
                         std::to_string(request.num_samples));
  }
  return response;
}

std::string truncate_tokens(std::string_view text, int max_tokens) {
  auto words = split_whitespace(text);
  if (words.size() <= static_cast<std::size_t>(max_tokens)) return std::string(text);
  words.resize(static_cast<std::size_t>(max_tokens));
  return join(words, " ");
}

MockGenerationProvider::MockGenerationProvider(
    std::map<std::string, std::vector<std::string>> pool, std::uint64_t default_seed)
    : pool_(std::move(pool)), default_seed_(default_seed) {}

MockGenerationProvider MockGenerationProvider::load(const std::string& path,
                                                    std::uint64_t default_seed) {
  const auto doc = read_json_file(path);
  try {
    return MockGenerationProvider(doc.get<std::map<std::string, std::vector<std::string>>>(),
                                  default_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": mock pool must map pair ids to lists of strings: " + e.what());
  }
}

GenerationResponse MockGenerationProvider::generate(const GenerationRequest& request) {
  auto it = pool_.find(request.pair_id);
  if (it == pool_.end()) it = pool_.find("*");
  if (it == pool_.end() || it->second.empty()) {
    throw LookupError("mock pool has no texts for pair '" + request.pair_id + "'");
  }
  const auto& candidates = it->second;
  Xoshiro256 rng(derive_seed(request.seed.value_or(default_seed_), request.pair_id));
  GenerationResponse response;
  response.model_id = "mock";
  response.texts.reserve(static_cast<std::size_t>(request.num_samples));
  for (int i = 0; i < request.num_samples; ++i) {
    const auto& text = candidates[rng.below(candidates.size())];
    response.texts.push_back(truncate_tokens(text, request.max_tokens));
  }
  return response;
}

ChatCompletionsProvider::ChatCompletionsProvider(ChatCompletionsConfig config)
    : config_(std::move(config)) {
  split_url(config_.endpoint.url);
}

nlohmann::json ChatCompletionsProvider::build_body(const std::string& model,
                                                   const GenerationRequest& request, int n) {
  nlohmann::json content = nlohmann::json::array();
  if (!request.image_png.empty()) {
    content.push_back({{"type", "image_url"},
                       {"image_url",
                        {{"url", "data:image/png;base64," + base64_encode(request.image_png)}}}});
  }
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  return {{"model", model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens},
          {"n", n}};
}

std::vector<std::string> ChatCompletionsProvider::parse_choices(const nlohmann::json& reply) {
  std::vector<std::string> texts;
  if (!reply.contains("choices") || !reply["choices"].is_array()) {
    throw TransportError("chat completion reply has no 'choices' array");
  }
  for (const auto& choice : reply["choices"]) {
    std::string text;
    if (choice.contains("message") && choice["message"].is_object()) {
      const auto& msg = choice["message"];
      if (msg.contains("content") && msg["content"].is_string()) {
        text = msg["content"].get<std::string>();
      }
    }
    texts.push_back(std::move(text));
  }
  return texts;
}

GenerationResponse ChatCompletionsProvider::generate(const GenerationRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  GenerationResponse response;
  response.model_id = config_.model;
  const std::size_t wanted = static_cast<std::size_t>(request.num_samples);
  while (response.texts.size() < wanted) {
    const int n = config_.supports_n ? static_cast<int>(wanted - response.texts.size()) : 1;
    const auto reply = post_json(config_.endpoint, build_body(config_.model, request, n),
                                 config_.retry, "generation for pair " + request.pair_id);
    auto texts = parse_choices(reply);
    if (texts.empty()) texts.assign(static_cast<std::size_t>(n), std::string());
    for (auto& t : texts) {
      if (response.texts.size() < wanted) response.texts.push_back(std::move(t));
    }
  }
  response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return response;
}

std::string ChatCompletionsProvider::ask(const std::string& question) {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", question}}})},
      {"temperature", 0.0},
      {"max_tokens", 8},
      {"n", 1}};
  const auto texts = parse_choices(post_json(config_.endpoint, body, config_.retry,
                                             "yes/no question"));
  return texts.empty() ? std::string() : texts.front();
}

MockYesNoProvider::MockYesNoProvider(std::map<std::string, std::string> replies) {
  for (auto& [verb, reply] : replies) replies_.emplace(normalize_verb_phrase(verb), reply);
}

MockYesNoProvider MockYesNoProvider::load(const std::string& path) {
  const auto doc = read_json_file(path);
  try {
    return MockYesNoProvider(doc.get<std::map<std::string, std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": expected an object of verb -> reply: " + e.what());
  }
}

std::string MockYesNoProvider::ask(const std::string& question) {
  constexpr std::string_view head = "Can a person ";
  constexpr std::string_view tail = " an object?";
  const auto end = question.find(tail);
  if (question.rfind(head, 0) != 0 || end == std::string::npos) return {};
  const std::string verb = question.substr(head.size(), end - head.size());
  auto it = replies_.find(verb);
  return it == replies_.end() ? std::string() : it->second;
}

void ConcurrencyGauge::enter() {
  const std::size_t now = ++current_;
  std::size_t seen = peak_.load();
  while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
  }
}

void ConcurrencyGauge::leave() { --current_; }

void generate_all(std::span<const GenerationRequest> requests, GenerationProvider& provider,
                  std::size_t max_in_flight,
                  const std::function<void(std::size_t, GenerationResponse&)>& on_ready,
                  ConcurrencyGauge* gauge) {
  const std::size_t n = requests.size();
  if (n == 0) return;
  const std::size_t workers = std::min(std::max<std::size_t>(1, max_in_flight), n);

  struct Slot {
    bool done = false;
    GenerationResponse response;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(n);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto work = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next++;
      if (i >= n) return;
      Slot result;
      if (gauge) gauge->enter();
      try {
        result.response = generate(requests[i], provider);
      } catch (...) {
        result.error = std::current_exception();
      }
      if (gauge) gauge->leave();
      result.done = true;
      {
        std::lock_guard lock(mutex);
        if (result.error) stop = true;
        slots[i] = std::move(result);
      }
      ready.notify_all();
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);

  std::exception_ptr failure;
  std::size_t failed_index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return slots[i].done || (stop && next.load() <= i); });
    if (!slots[i].done) break;  // never started because of an earlier failure
    if (slots[i].error) {
      failure = slots[i].error;
      failed_index = i;
      break;
    }
    GenerationResponse response = std::move(slots[i].response);
    lock.unlock();
    try {
      on_ready(i, response);
    } catch (...) {
      stop = true;
      throw;
    }
  }
  stop = true;
  pool.clear();  // joins

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const TransportError&) {
      throw;
    } catch (const std::exception& e) {
      throw TransportError("pair " + requests[failed_index].pair_id + ": " + e.what());
    }
  }
}

}  // namespace uhoi
