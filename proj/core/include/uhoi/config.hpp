#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/aggregation.hpp"
#include "uhoi/datamodel.hpp"
#include "uhoi/extraction.hpp"
#include "uhoi/generation.hpp"
#include "uhoi/metrics.hpp"
#include "uhoi/pairing.hpp"

namespace uhoi {

struct ProviderSettings {
  std::string kind = "mock";  // mock | chat
  std::string mock_pool;
  std::string url;
  std::string model;
  std::string api_key_env = "UHOI_API_KEY";
  bool supports_n = true;
  int timeout_seconds = 120;
  int max_retries = 4;
};

struct EmbeddingSettings {
  std::string kind = "tsv";  // tsv | http | exact
  std::string path;
  std::string url;
  std::string api_key_env = "UHOI_EMBEDDING_KEY";
  std::string phrase_template = "{}";
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 64;
};

struct T2GSettings {
  std::string kind = "mock";  // mock | http
  std::string path;
  std::string url;
  std::string api_key_env = "UHOI_T2G_KEY";
};

// Every knob of a run. Defaults are the reference settings of the protocol.
struct PipelineConfig {
  EvalConfig eval;
  DetectionFilter detection;
  bool include_human_human = true;
  VisualMode visual_mode = VisualMode::kCrop;
  PromptKind prompt_kind = PromptKind::kDirect;
  double temperature = 0.2;
  int max_tokens = 2048;
  int num_generations = 64;
  int top_k = 10;
  AggregationStrategy aggregation = AggregationStrategy::kTopK;
  std::uint64_t seed = 0;
  // auto: structured parser for the structured prompt, rule-based otherwise.
  std::string extractor = "auto";
  ObjectMatchMode object_match = ObjectMatchMode::kExact;
  double object_similarity_threshold = 0.9;
  std::vector<std::string> verb_blacklist;
  bool lemmatize = false;
  std::size_t max_in_flight = 4;
  ProviderSettings provider;
  EmbeddingSettings embeddings;
  T2GSettings t2g;

  PipelineConfig();

  void validate() const;
  TripletSource effective_extractor() const;
  RefinementConfig refinement() const;

  nlohmann::ordered_json to_json() const;
  // Keys missing from `value` keep their defaults; unknown keys are errors.
  static PipelineConfig from_json(const nlohmann::json& value);
  // Relative file paths inside the config resolve against its directory.
  static PipelineConfig load(const std::string& path);

  std::string hash() const;
  // Hashes of the fields each stage depends on, so that changing, say, the
  // similarity thresholds does not invalidate a finished transcript.
  std::string pairs_hash() const;
  std::string generation_hash() const;
  std::string extraction_hash() const;
  std::string evaluation_hash() const;
};

// "a.b.c=value": value is parsed as JSON when possible, else taken as a string.
void apply_override(PipelineConfig& config, std::string_view assignment);

}  // namespace uhoi
