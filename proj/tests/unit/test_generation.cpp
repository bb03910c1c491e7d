#include <gtest/gtest.h>

#include <mutex>
#include <thread>

#include "local_server.hpp"
#include "uhoi/error.hpp"
#include "uhoi/generation.hpp"

using uhoi::GenerationRequest;
using uhoi::PromptKind;

namespace {

GenerationRequest request(const std::string& pair_id, int n = 1) {
  GenerationRequest r;
  r.pair_id = pair_id;
  r.prompt = uhoi::render_prompt(PromptKind::kDirect, "bike");
  r.num_samples = n;
  return r;
}

std::string chat_reply(const std::vector<std::string>& texts) {
  nlohmann::json choices = nlohmann::json::array();
  for (const auto& t : texts) choices.push_back({{"message", {{"content", t}}}});
  return nlohmann::json{{"choices", choices}}.dump();
}

class SleepyProvider final : public uhoi::GenerationProvider {
 public:
  explicit SleepyProvider(std::string fail_on = {}) : fail_on_(std::move(fail_on)) {}
  uhoi::GenerationResponse generate(const GenerationRequest& r) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    {
      std::lock_guard lock(mutex_);
      started_.push_back(r.pair_id);
    }
    if (r.pair_id == fail_on_) throw std::runtime_error("boom");
    return {std::vector<std::string>(static_cast<std::size_t>(r.num_samples), r.pair_id), "sleepy",
            {}};
  }
  std::string describe() const override { return "sleepy"; }
  std::vector<std::string> started() {
    std::lock_guard lock(mutex_);
    return started_;
  }

 private:
  std::string fail_on_;
  std::mutex mutex_;
  std::vector<std::string> started_;
};

}  // namespace

TEST(Prompt, DirectQuestion) {
  EXPECT_EQ(uhoi::render_prompt(PromptKind::kDirect, "bike"),
            "What are the interactions between the person and the bike?");
}

TEST(Prompt, Variants) {
  EXPECT_EQ(uhoi::render_prompt(PromptKind::kCot, "cup"),
            "What are the interactions between the person and the cup? Think step by step.");
  EXPECT_NE(uhoi::render_prompt(PromptKind::kDescriptive, "cup").find("reply with \"no interaction\""),
            std::string::npos);
  const auto structured = uhoi::render_prompt(PromptKind::kStructured, "cup");
  EXPECT_NE(structured.find("(person, verb, cup)"), std::string::npos);
  EXPECT_NE(structured.find("(person, none, cup)"), std::string::npos);
  EXPECT_THROW(uhoi::render_prompt(PromptKind::kDirect, " "), uhoi::ValidationError);
}

TEST(Prompt, KindNamesRoundTrip) {
  for (auto k : {PromptKind::kDirect, PromptKind::kCot, PromptKind::kDescriptive,
                 PromptKind::kStructured}) {
    EXPECT_EQ(uhoi::parse_prompt_kind(uhoi::to_string(k)), k);
  }
  EXPECT_THROW(uhoi::parse_prompt_kind("haiku"), uhoi::ConfigError);
}

TEST(Request, Validation) {
  auto r = request("p");
  r.max_tokens = 0;
  EXPECT_THROW(r.validate(), uhoi::ConfigError);
  r = request("p", 0);
  EXPECT_THROW(r.validate(), uhoi::ConfigError);
  r = request("p");
  r.temperature = -0.1;
  EXPECT_THROW(r.validate(), uhoi::ConfigError);
}

TEST(Mock, DeterministicPerSeedAndPair) {
  uhoi::MockGenerationProvider provider({{"*", {"a", "b", "c", "d", "e"}}}, 3);
  const auto a = uhoi::generate(request("x", 16), provider).texts;
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(uhoi::generate(request("x", 16), provider).texts, a);
  auto reseeded = request("x", 16);
  reseeded.seed = 4;
  EXPECT_NE(uhoi::generate(reseeded, provider).texts, a);
  EXPECT_NE(uhoi::generate(request("y", 16), provider).texts, a);
}

TEST(Mock, PairEntryBeatsFallbackAndMissingIsLookupError) {
  uhoi::MockGenerationProvider provider({{"x", std::vector<std::string>{"only"}}});
  EXPECT_EQ(uhoi::generate(request("x", 2), provider).texts,
            (std::vector<std::string>{"only", "only"}));
  EXPECT_THROW(uhoi::generate(request("y"), provider), uhoi::LookupError);
}

TEST(Mock, TruncatesToMaxTokens) {
  uhoi::MockGenerationProvider provider({{"*", std::vector<std::string>{"one two three four"}}});
  auto r = request("x");
  r.max_tokens = 2;
  EXPECT_EQ(uhoi::generate(r, provider).texts.front(), "one two");
  EXPECT_EQ(uhoi::truncate_tokens("a  b", 5), "a  b");
}

TEST(Chat, BodyCarriesImageAndPrompt) {
  auto r = request("x");
  r.image_png = {1, 2, 3};
  const auto body = uhoi::ChatCompletionsProvider::build_body("m", r, 4);
  EXPECT_EQ(body["n"], 4);
  EXPECT_EQ(body["model"], "m");
  const auto& content = body["messages"][0]["content"];
  ASSERT_EQ(content.size(), 2u);
  EXPECT_EQ(content[0]["image_url"]["url"], "data:image/png;base64,AQID");
  EXPECT_EQ(content[1]["text"], r.prompt);
}

TEST(Chat, RefusalBecomesEmptyText) {
  const auto reply = nlohmann::json::parse(
      R"({"choices": [{"message": {"content": null, "refusal": "no"}}, {"message": {"content": "hi"}}]})");
  EXPECT_EQ(uhoi::ChatCompletionsProvider::parse_choices(reply),
            (std::vector<std::string>{"", "hi"}));
  EXPECT_THROW(uhoi::ChatCompletionsProvider::parse_choices(nlohmann::json::object()),
               uhoi::TransportError);
}

TEST(Chat, SingleCallWithN) {
  LocalServer server("/v1/chat", [](const httplib::Request& req, httplib::Response& res) {
    const int n = nlohmann::json::parse(req.body)["n"];
    res.set_content(chat_reply(std::vector<std::string>(static_cast<std::size_t>(n), "ride")),
                    "application/json");
  });
  uhoi::ChatCompletionsProvider provider({{server.url("/v1/chat"), ""}, "m"});
  EXPECT_EQ(uhoi::generate(request("x", 3), provider).texts.size(), 3u);
  EXPECT_EQ(server.requests(), 1);
}

TEST(Chat, WithoutNIssuesOneCallPerSample) {
  LocalServer server("/v1/chat", [](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(nlohmann::json::parse(req.body)["n"], 1);
    res.set_content(chat_reply({"ride"}), "application/json");
  });
  uhoi::ChatCompletionsProvider provider({{server.url("/v1/chat"), ""}, "m", false});
  EXPECT_EQ(uhoi::generate(request("x", 3), provider).texts.size(), 3u);
  EXPECT_EQ(server.requests(), 3);
}

TEST(Chat, RetriesServerErrors) {
  NoBackoffSleep no_sleep;
  std::atomic<int> calls{0};
  LocalServer server("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 500;
      return;
    }
    res.set_content(chat_reply({"ok"}), "application/json");
  });
  uhoi::ChatCompletionsProvider provider({{server.url("/v1/chat"), ""}, "m"});
  EXPECT_EQ(uhoi::generate(request("x"), provider).texts.front(), "ok");
  EXPECT_EQ(server.requests(), 3);
}

TEST(Chat, ClientErrorFailsImmediately) {
  NoBackoffSleep no_sleep;
  LocalServer server("/v1/chat", [](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
  });
  uhoi::ChatCompletionsProvider provider({{server.url("/v1/chat"), ""}, "m"});
  EXPECT_THROW(uhoi::generate(request("x"), provider), uhoi::TransportError);
  EXPECT_EQ(server.requests(), 1);
}

TEST(Chat, AnswersYesNoQuestions) {
  LocalServer server("/v1/chat", [](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(nlohmann::json::parse(req.body)["messages"][0]["content"], "Can a person ride an object?");
    res.set_content(chat_reply({"Yes."}), "application/json");
  });
  uhoi::ChatCompletionsProvider provider({{server.url("/v1/chat"), ""}, "m"});
  EXPECT_EQ(provider.ask("Can a person ride an object?"), "Yes.");
}

TEST(MockYesNo, LooksUpVerb) {
  uhoi::MockYesNoProvider provider({{"Ride", "yes"}, {"be", "no"}});
  EXPECT_EQ(provider.ask("Can a person ride an object?"), "yes");
  EXPECT_EQ(provider.ask("Can a person be an object?"), "no");
  EXPECT_EQ(provider.ask("Can a person fly an object?"), "");
  EXPECT_EQ(provider.ask("unrelated"), "");
}

TEST(GenerateAll, DeliversInRequestOrderUnderCap) {
  std::vector<GenerationRequest> requests;
  for (int i = 0; i < 24; ++i) requests.push_back(request("p" + std::to_string(i), 2));
  SleepyProvider provider;
  uhoi::ConcurrencyGauge gauge;
  std::vector<std::size_t> order;
  const auto caller = std::this_thread::get_id();
  uhoi::generate_all(requests, provider, 4,
                     [&](std::size_t i, uhoi::GenerationResponse& r) {
                       EXPECT_EQ(std::this_thread::get_id(), caller);
                       EXPECT_EQ(r.texts.front(), requests[i].pair_id);
                       order.push_back(i);
                     },
                     &gauge);
  ASSERT_EQ(order.size(), requests.size());
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
  EXPECT_LE(gauge.peak(), 4u);
  EXPECT_GE(gauge.peak(), 2u);
  EXPECT_EQ(gauge.current(), 0u);
}

TEST(GenerateAll, FailureStopsAndNamesPair) {
  std::vector<GenerationRequest> requests;
  for (int i = 0; i < 40; ++i) requests.push_back(request("p" + std::to_string(i)));
  SleepyProvider provider("p5");
  std::vector<std::size_t> delivered;
  try {
    uhoi::generate_all(requests, provider, 2,
                       [&](std::size_t i, uhoi::GenerationResponse&) { delivered.push_back(i); });
    FAIL() << "expected TransportError";
  } catch (const uhoi::TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("p5"), std::string::npos);
  }
  EXPECT_EQ(delivered, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_LT(provider.started().size(), requests.size());
}

TEST(GenerateAll, EmptyIsNoop) {
  SleepyProvider provider;
  uhoi::generate_all({}, provider, 4, [](std::size_t, uhoi::GenerationResponse&) { FAIL(); });
}
