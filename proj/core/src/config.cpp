#include "uhoi/config.hpp"

#include <filesystem>

#include "uhoi/error.hpp"
#include "uhoi/hash.hpp"

namespace uhoi {

namespace {

using ojson = nlohmann::ordered_json;

void reject_unknown(const nlohmann::json& given, const ojson& known, const std::string& prefix) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
    if (known[key].is_object()) reject_unknown(value, known[key], path);
  }
}

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (base / p).lexically_normal().string();
}

}  // namespace

PipelineConfig::PipelineConfig() {
  const auto blacklist = default_copular_blacklist();
  verb_blacklist.assign(blacklist.begin(), blacklist.end());
}

void PipelineConfig::validate() const {
  eval.validate();
  if (!(detection.confidence_threshold >= 0.0 && detection.confidence_threshold <= 1.0)) {
    throw ConfigError("detection.confidence_threshold must lie in [0, 1]");
  }
  if (detection.min_instances > detection.max_instances) {
    throw ConfigError("detection.min_instances exceeds detection.max_instances");
  }
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be > 0");
  if (num_generations < 1) throw ConfigError("num_generations must be >= 1");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (provider.kind != "mock" && provider.kind != "chat") {
    throw ConfigError("provider.kind must be mock or chat, got '" + provider.kind + "'");
  }
  if (embeddings.kind != "tsv" && embeddings.kind != "http" && embeddings.kind != "exact") {
    throw ConfigError("embeddings.kind must be tsv, http or exact, got '" + embeddings.kind + "'");
  }
  if (t2g.kind != "mock" && t2g.kind != "http") {
    throw ConfigError("t2g.kind must be mock or http, got '" + t2g.kind + "'");
  }
  effective_extractor();
  refinement().validate();
}

TripletSource PipelineConfig::effective_extractor() const {
  if (extractor == "auto") {
    return prompt_kind == PromptKind::kStructured ? TripletSource::kStructured
                                                  : TripletSource::kRuleBased;
  }
  return parse_triplet_source(extractor);
}

RefinementConfig PipelineConfig::refinement() const {
  RefinementConfig r;
  r.verb_blacklist = std::set<std::string>(verb_blacklist.begin(), verb_blacklist.end());
  r.object_match = object_match;
  r.similarity_threshold = object_similarity_threshold;
  return r;
}

ojson PipelineConfig::to_json() const {
  ojson j;
  j["eval"] = eval_config_to_json(eval);
  j["detection"] = {{"confidence_threshold", detection.confidence_threshold},
                    {"min_instances", detection.min_instances},
                    {"max_instances", detection.max_instances},
                    {"per_class", detection.pool == InstancePool::kPerClass}};
  j["include_human_human"] = include_human_human;
  j["visual_mode"] = to_string(visual_mode);
  j["prompt_kind"] = to_string(prompt_kind);
  j["temperature"] = temperature;
  j["max_tokens"] = max_tokens;
  j["num_generations"] = num_generations;
  j["top_k"] = top_k;
  j["aggregation"] = to_string(aggregation);
  j["seed"] = seed;
  j["extractor"] = extractor;
  j["object_match"] = object_match == ObjectMatchMode::kSimilarity ? "similarity" : "exact";
  j["object_similarity_threshold"] = object_similarity_threshold;
  j["verb_blacklist"] = verb_blacklist;
  j["lemmatize"] = lemmatize;
  j["max_in_flight"] = max_in_flight;
  j["provider"] = {{"kind", provider.kind},
                   {"mock_pool", provider.mock_pool},
                   {"url", provider.url},
                   {"model", provider.model},
                   {"api_key_env", provider.api_key_env},
                   {"supports_n", provider.supports_n},
                   {"timeout_seconds", provider.timeout_seconds},
                   {"max_retries", provider.max_retries}};
  j["embeddings"] = {{"kind", embeddings.kind},
                     {"path", embeddings.path},
                     {"url", embeddings.url},
                     {"api_key_env", embeddings.api_key_env},
                     {"phrase_template", embeddings.phrase_template},
                     {"max_in_flight", embeddings.max_in_flight},
                     {"batch_size", embeddings.batch_size}};
  j["t2g"] = {{"kind", t2g.kind},
              {"path", t2g.path},
              {"url", t2g.url},
              {"api_key_env", t2g.api_key_env}};
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& value) {
  if (!value.is_object()) throw ConfigError("configuration must be a JSON object");
  const PipelineConfig defaults;
  const ojson known = defaults.to_json();
  reject_unknown(value, known, "");
  nlohmann::json j = nlohmann::json::parse(known.dump());
  j.merge_patch(value);

  PipelineConfig c;
  try {
    c.eval = eval_config_from_json(j.at("eval"));
    const auto& d = j.at("detection");
    c.detection.confidence_threshold = d.at("confidence_threshold").get<double>();
    c.detection.min_instances = d.at("min_instances").get<std::size_t>();
    c.detection.max_instances = d.at("max_instances").get<std::size_t>();
    c.detection.pool = d.at("per_class").get<bool>() ? InstancePool::kPerClass : InstancePool::kJoint;
    c.include_human_human = j.at("include_human_human").get<bool>();
    c.visual_mode = parse_visual_mode(j.at("visual_mode").get<std::string>());
    c.prompt_kind = parse_prompt_kind(j.at("prompt_kind").get<std::string>());
    c.temperature = j.at("temperature").get<double>();
    c.max_tokens = j.at("max_tokens").get<int>();
    c.num_generations = j.at("num_generations").get<int>();
    c.top_k = j.at("top_k").get<int>();
    c.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.extractor = j.at("extractor").get<std::string>();
    const auto om = j.at("object_match").get<std::string>();
    if (om != "exact" && om != "similarity") {
      throw ConfigError("object_match must be exact or similarity, got '" + om + "'");
    }
    c.object_match = om == "similarity" ? ObjectMatchMode::kSimilarity : ObjectMatchMode::kExact;
    c.object_similarity_threshold = j.at("object_similarity_threshold").get<double>();
    c.verb_blacklist = j.at("verb_blacklist").get<std::vector<std::string>>();
    c.lemmatize = j.at("lemmatize").get<bool>();
    c.max_in_flight = j.at("max_in_flight").get<std::size_t>();
    const auto& p = j.at("provider");
    c.provider.kind = p.at("kind").get<std::string>();
    c.provider.mock_pool = p.at("mock_pool").get<std::string>();
    c.provider.url = p.at("url").get<std::string>();
    c.provider.model = p.at("model").get<std::string>();
    c.provider.api_key_env = p.at("api_key_env").get<std::string>();
    c.provider.supports_n = p.at("supports_n").get<bool>();
    c.provider.timeout_seconds = p.at("timeout_seconds").get<int>();
    c.provider.max_retries = p.at("max_retries").get<int>();
    const auto& e = j.at("embeddings");
    c.embeddings.kind = e.at("kind").get<std::string>();
    c.embeddings.path = e.at("path").get<std::string>();
    c.embeddings.url = e.at("url").get<std::string>();
    c.embeddings.api_key_env = e.at("api_key_env").get<std::string>();
    c.embeddings.phrase_template = e.at("phrase_template").get<std::string>();
    c.embeddings.max_in_flight = e.at("max_in_flight").get<std::size_t>();
    c.embeddings.batch_size = e.at("batch_size").get<std::size_t>();
    const auto& t = j.at("t2g");
    c.t2g.kind = t.at("kind").get<std::string>();
    c.t2g.path = t.at("path").get<std::string>();
    c.t2g.url = t.at("url").get<std::string>();
    c.t2g.api_key_env = t.at("api_key_env").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  PipelineConfig c = from_json(read_json_file(path));
  const auto base = std::filesystem::path(path).parent_path();
  c.provider.mock_pool = resolve(c.provider.mock_pool, base);
  c.embeddings.path = resolve(c.embeddings.path, base);
  c.t2g.path = resolve(c.t2g.path, base);
  return c;
}

std::string PipelineConfig::hash() const { return content_hash(to_json().dump()); }

std::string PipelineConfig::pairs_hash() const {
  const auto j = to_json();
  return content_hash(ojson{{"protocol", j["eval"]["protocol"]},
                            {"detection", j["detection"]},
                            {"include_human_human", j["include_human_human"]},
                            {"visual_mode", j["visual_mode"]}}
                          .dump());
}

std::string PipelineConfig::generation_hash() const {
  const auto j = to_json();
  ojson provider = j["provider"];
  provider.erase("max_retries");
  provider.erase("timeout_seconds");
  return content_hash(ojson{{"pairs", pairs_hash()},
                            {"prompt_kind", j["prompt_kind"]},
                            {"temperature", j["temperature"]},
                            {"max_tokens", j["max_tokens"]},
                            {"num_generations", j["num_generations"]},
                            {"seed", j["seed"]},
                            {"provider", provider}}
                          .dump());
}

std::string PipelineConfig::extraction_hash() const {
  const auto j = to_json();
  return content_hash(ojson{{"generation", generation_hash()},
                            {"top_k", j["top_k"]},
                            {"aggregation", j["aggregation"]},
                            {"extractor", j["extractor"]},
                            {"object_match", j["object_match"]},
                            {"object_similarity_threshold", j["object_similarity_threshold"]},
                            {"verb_blacklist", j["verb_blacklist"]},
                            {"t2g", j["t2g"]}}
                          .dump());
}

std::string PipelineConfig::evaluation_hash() const {
  const auto j = to_json();
  return content_hash(ojson{{"extraction", extraction_hash()},
                            {"eval", j["eval"]},
                            {"lemmatize", j["lemmatize"]},
                            {"embeddings", j["embeddings"]}}
                          .dump());
}

void apply_override(PipelineConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::json patch = nlohmann::json::object();
  nlohmann::json* node = &patch;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
  nlohmann::json merged = nlohmann::json::parse(config.to_json().dump());
  reject_unknown(patch, config.to_json(), "");
  merged.merge_patch(patch);
  config = PipelineConfig::from_json(merged);
}

}  // namespace uhoi
