#include "uhoi/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "uhoi/error.hpp"
#include "uhoi/image.hpp"
#include "uhoi/manifest.hpp"
#include "uhoi/rng.hpp"
#include "uhoi/text.hpp"

namespace uhoi {

namespace fs = std::filesystem;

namespace {

std::string file_safe(std::string id) {
  for (char& c : id) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return id;
}

HttpEndpoint endpoint(const std::string& url, const std::string& key_env, int timeout_seconds) {
  return {url, key_env, std::chrono::seconds(timeout_seconds)};
}

}  // namespace

std::optional<std::string> find_image(const std::string& images_dir, const std::string& image_id) {
  for (const char* ext : {".png", ".jpg", ".jpeg"}) {
    const fs::path p = fs::path(images_dir) / (image_id + ext);
    if (fs::exists(p)) return p.string();
  }
  return std::nullopt;
}

PairsStageResult run_pairs(const PipelineConfig& config, const std::vector<EvalSample>& samples,
                           const std::string& images_dir, const std::string& prompts_dir) {
  PairsStageResult result;
  result.summary.stage = "pairs";
  if (!prompts_dir.empty()) fs::create_directories(prompts_dir);
  PairingOptions options;
  options.include_human_human = config.include_human_human;

  for (const auto& sample : samples) {
    const auto detections = config.eval.protocol == Protocol::kComputedBox
                                ? filter_detections(sample.detections, config.detection)
                                : sample.detections;
    std::optional<RgbImage> image;
    if (!images_dir.empty()) {
      const auto path = find_image(images_dir, sample.image_id);
      if (!path) {
        result.summary.issues.push_back({sample.image_id, "image file not found in " + images_dir});
        continue;
      }
      try {
        image = load_image(*path);
      } catch (const Error& e) {
        result.summary.issues.push_back({sample.image_id, e.what()});
        continue;
      }
    }
    for (auto& pair : build_pairs(sample.image_id, detections, options)) {
      PairRecord record{std::move(pair), {}};
      if (image && !prompts_dir.empty()) {
        try {
          const auto prompt = render_visual_prompt(*image, record.pair, config.visual_mode);
          const auto out = fs::path(prompts_dir) / (file_safe(record.pair.pair_id) + ".png");
          save_png(prompt.image, out.string());
          record.visual_prompt_path = out.string();
        } catch (const Error& e) {
          result.summary.issues.push_back({record.pair.pair_id, e.what()});
          continue;
        }
      }
      result.pairs.push_back(std::move(record));
    }
    ++result.summary.processed;
  }
  return result;
}

StageSummary run_generate(const PipelineConfig& config, const std::vector<PairRecord>& pairs,
                          GenerationProvider& provider, const std::string& images_dir,
                          const std::string& transcript_path, ConcurrencyGauge* gauge) {
  StageSummary summary;
  summary.stage = "generate";
  const int n = config.num_generations;

  // Keep complete pairs only, rewritten in pair order.
  auto existing = read_transcript(transcript_path);
  auto done = complete_pairs(existing.records, config.prompt_kind, n);
  {
    const std::string tmp = transcript_path + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp);
    for (const auto& p : pairs) {
      auto it = done.find(p.pair.pair_id);
      if (it == done.end()) continue;
      for (int i = 0; i < n; ++i) {
        write_transcript_line(out, {p.pair.pair_id, config.prompt_kind, i, it->second[i]});
      }
    }
    out.close();
    fs::rename(tmp, transcript_path);
  }

  std::map<std::string, RgbImage> images;
  std::vector<GenerationRequest> requests;
  for (const auto& p : pairs) {
    if (done.contains(p.pair.pair_id)) continue;
    GenerationRequest req;
    req.pair_id = p.pair.pair_id;
    req.prompt = render_prompt(config.prompt_kind, p.pair.object.label);
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.num_samples = n;
    req.seed = config.seed;
    if (!images_dir.empty()) {
      try {
        auto it = images.find(p.pair.image_id);
        if (it == images.end()) {
          const auto path = find_image(images_dir, p.pair.image_id);
          if (!path) throw ImageError("image file not found in " + images_dir);
          it = images.emplace(p.pair.image_id, load_image(*path)).first;
        }
        req.image_png = encode_png(render_visual_prompt(it->second, p.pair, config.visual_mode).image);
      } catch (const Error& e) {
        summary.issues.push_back({p.pair.pair_id, e.what()});
        continue;
      }
    }
    requests.push_back(std::move(req));
  }
  summary.processed = done.size();

  std::ofstream out(transcript_path, std::ios::binary | std::ios::app);
  if (!out) throw ParseError("cannot append to " + transcript_path);
  try {
    generate_all(requests, provider, config.max_in_flight,
                 [&](std::size_t i, GenerationResponse& response) {
                   for (int s = 0; s < n; ++s) {
                     write_transcript_line(out, {requests[i].pair_id, config.prompt_kind, s,
                                                 response.texts[static_cast<std::size_t>(s)]});
                   }
                   out.flush();
                   ++summary.processed;
                 },
                 gauge);
  } catch (const Error& e) {
    summary.complete = false;
    summary.issues.push_back({"provider", e.what()});
    summary.hint = "rerun the same command to resume; completed pairs are kept";
  }
  return summary;
}

std::vector<RawTriplet> extract_sample(const PipelineConfig& config, const std::string& text,
                                       const std::string& object_label, int sample_index,
                                       ExtractionResources& resources) {
  switch (config.effective_extractor()) {
    case TripletSource::kRuleBased:
      return extract_rule_based(text, sample_index, *resources.lexicon);
    case TripletSource::kStructured:
      return parse_structured(text, object_label, sample_index).triplets;
    case TripletSource::kT2G:
      if (resources.t2g == nullptr) throw ConfigError("t2g extractor selected without a provider");
      return extract_t2g(text, *resources.t2g, sample_index);
  }
  return {};
}

ExtractStageResult run_extract(const PipelineConfig& config, const std::vector<PairRecord>& pairs,
                               const std::vector<TranscriptRecord>& transcript,
                               ExtractionResources& resources, const std::string& triplets_path,
                               const std::string& selections_path) {
  ExtractStageResult result;
  result.summary.stage = "extract";
  const auto texts = complete_pairs(transcript, config.prompt_kind, config.num_generations);
  const RefinementConfig refinement = config.refinement();

  std::ofstream triplets_out;
  std::ofstream selections_out;
  if (!triplets_path.empty()) {
    triplets_out.open(triplets_path, std::ios::binary | std::ios::trunc);
    if (!triplets_out) throw ParseError("cannot write " + triplets_path);
  }
  if (!selections_path.empty()) {
    selections_out.open(selections_path, std::ios::binary | std::ios::trunc);
    if (!selections_out) throw ParseError("cannot write " + selections_path);
  }

  for (const auto& p : pairs) {
    const auto& pair_id = p.pair.pair_id;
    auto it = texts.find(pair_id);
    if (it == texts.end()) {
      result.summary.issues.push_back(
          {pair_id, "transcript lacks the " + std::to_string(config.num_generations) +
                        " samples of this pair"});
      continue;
    }
    const std::string& object = p.pair.object.label;
    std::vector<std::vector<RawTriplet>> refined_per_sample;
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      std::vector<RawTriplet> raw;
      std::vector<RawTriplet> refined;
      try {
        raw = extract_sample(config, it->second[i], object, static_cast<int>(i), resources);
        refined = refine(raw, object, refinement, resources.object_similarity);
      } catch (const TransportError& e) {
        throw TransportError("stage extract, pair " + pair_id + ": " + e.what());
      } catch (const LookupError& e) {
        throw LookupError("stage extract, pair " + pair_id + ": " + e.what());
      }
      nlohmann::ordered_json raw_json = nlohmann::ordered_json::array();
      nlohmann::ordered_json refined_json = nlohmann::ordered_json::array();
      for (const auto& t : raw) raw_json.push_back(triplet_to_json(t));
      for (const auto& t : refined) refined_json.push_back(triplet_to_json(t));
      samples.push_back({{"sample_index", i}, {"raw", raw_json}, {"refined", refined_json}});
      refined_per_sample.push_back(std::move(refined));
    }

    PairSelection selection;
    selection.pair_id = pair_id;
    selection.strategy = config.aggregation;
    selection.k = config.top_k;
    const auto freq = pool(refined_per_sample);
    selection.num_samples = freq.num_samples;
    selection.selected = config.aggregation == AggregationStrategy::kTopK
                             ? select_topk(freq, config.top_k)
                             : select_sampling(freq, config.top_k, derive_seed(config.seed, pair_id));

    if (triplets_out.is_open()) {
      triplets_out << nlohmann::ordered_json{{"pair_id", pair_id},
                                             {"object_label", object},
                                             {"samples", samples}}
                          .dump()
                   << '\n';
    }
    if (selections_out.is_open()) selections_out << selection_to_json(selection).dump() << '\n';
    result.selections.push_back(std::move(selection));
    ++result.summary.processed;
  }
  return result;
}

PredictionMap predictions_from_selections(const std::vector<PairRecord>& pairs,
                                          const std::vector<PairSelection>& selections) {
  std::map<std::string, const PairRecord*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.pair.pair_id, &p);
  PredictionMap out;
  for (const auto& s : selections) {
    auto it = by_id.find(s.pair_id);
    if (it == by_id.end()) throw LookupError("selection for unknown pair '" + s.pair_id + "'");
    const auto& pair = it->second->pair;
    auto& list = out[pair.image_id];
    for (const auto& st : s.selected) {
      list.push_back(PredictedInteraction::make(
          pair.human.box, pair.object.box, pair.object.label, st.triplet.verb, st.score,
          Provenance{st.triplet.sample_index, to_string(st.triplet.source)}));
    }
  }
  return out;
}

nlohmann::ordered_json predictions_to_json(const PredictionMap& predictions) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& [image_id, preds] : predictions) {
    for (const auto& p : preds) {
      nlohmann::ordered_json item;
      item["image_id"] = image_id;
      item["human_box"] = box_to_json(p.human_box);
      item["object_box"] = box_to_json(p.object_box);
      item["object_label"] = p.object_label;
      item["verb"] = p.verb_phrase;
      item["score"] = p.score;
      if (!p.provenance.rule.empty()) item["source"] = p.provenance.rule;
      list.push_back(std::move(item));
    }
  }
  return {{"predictions", list}};
}

MetricReport evaluate_dataset(const std::vector<EvalSample>& samples,
                              const PredictionMap& predictions, const VerbVocabulary& vocabulary,
                              Similarity& sim, const EvalConfig& config, const RaritySplit* split,
                              bool lemmatize, StageSummary* summary) {
  config.validate();
  std::set<std::string> known;
  for (const auto& s : samples) known.insert(s.image_id);
  for (const auto& [image_id, preds] : predictions) {
    if (!known.contains(image_id)) {
      spdlog::warn("ignoring {} predictions for unannotated image '{}'", preds.size(), image_id);
      if (summary) summary->hint = "some predictions refer to unannotated images";
    }
  }

  const VerbNormalization norm{lemmatize};
  PredictionMap normalized;
  std::set<std::string> phrases(vocabulary.verbs().begin(), vocabulary.verbs().end());
  for (const auto& [image_id, preds] : predictions) {
    auto& list = normalized[image_id];
    for (auto p : preds) {
      if (lemmatize) p.verb_phrase = normalize_verb_phrase(p.verb_phrase, norm);
      phrases.insert(p.verb_phrase);
      list.push_back(std::move(p));
    }
  }
  const std::vector<std::string> batch(phrases.begin(), phrases.end());
  sim.prefetch(batch);

  static const std::vector<PredictedInteraction> kNone;
  std::vector<ImageResult> images;
  images.reserve(samples.size());
  for (const auto& s : samples) {
    auto it = normalized.find(s.image_id);
    images.push_back(evaluate_image(s.image_id, it == normalized.end() ? kNone : it->second,
                                    s.ground_truth, vocabulary, sim, config));
    if (summary) ++summary->processed;
  }
  return aggregate_report(images, split);
}

nlohmann::ordered_json report_meta(const PipelineConfig& config, const std::string& name,
                                   const std::string& source) {
  nlohmann::ordered_json meta;
  meta["name"] = name;
  meta["source"] = source;
  meta["similarity"] = config.embeddings.kind;
  meta["phrase_template"] = config.embeddings.phrase_template;
  meta["lemmatize"] = config.lemmatize;
  if (source == "transcript") {
    meta["num_generations"] = config.num_generations;
    meta["top_k"] = config.top_k;
    meta["aggregation"] = to_string(config.aggregation);
    meta["prompt_kind"] = to_string(config.prompt_kind);
    meta["visual_mode"] = to_string(config.visual_mode);
    meta["extractor"] = to_string(config.effective_extractor());
    meta["temperature"] = config.temperature;
    meta["seed"] = config.seed;
  }
  return meta;
}

std::unique_ptr<GenerationProvider> make_generation_provider(const PipelineConfig& config) {
  if (config.provider.kind == "mock") {
    if (config.provider.mock_pool.empty()) {
      throw ConfigError("provider.kind is mock but provider.mock_pool is not set");
    }
    return std::make_unique<MockGenerationProvider>(
        MockGenerationProvider::load(config.provider.mock_pool, config.seed));
  }
  ChatCompletionsConfig chat;
  chat.endpoint = endpoint(config.provider.url, config.provider.api_key_env,
                           config.provider.timeout_seconds);
  chat.model = config.provider.model;
  chat.supports_n = config.provider.supports_n;
  chat.retry.max_retries = config.provider.max_retries;
  return std::make_unique<ChatCompletionsProvider>(std::move(chat));
}

std::unique_ptr<Similarity> make_similarity(const PipelineConfig& config) {
  const auto& e = config.embeddings;
  if (e.kind == "exact") return std::make_unique<ExactMatchSimilarity>();
  EmbeddingOptions options{e.phrase_template, e.max_in_flight, e.batch_size};
  if (e.kind == "tsv") {
    if (e.path.empty()) throw ConfigError("embeddings.kind is tsv but embeddings.path is not set");
    return std::make_unique<EmbeddingSimilarity>(TsvEmbeddingBackend::load(e.path), options);
  }
  return std::make_unique<EmbeddingSimilarity>(
      std::make_shared<HttpEmbeddingBackend>(endpoint(e.url, e.api_key_env, 120)), options);
}

std::unique_ptr<T2GProvider> make_t2g_provider(const PipelineConfig& config) {
  if (config.effective_extractor() != TripletSource::kT2G) return nullptr;
  if (config.t2g.kind == "mock") {
    if (config.t2g.path.empty()) throw ConfigError("t2g.kind is mock but t2g.path is not set");
    return std::make_unique<MockT2GProvider>(MockT2GProvider::load(config.t2g.path));
  }
  return std::make_unique<HttpT2GProvider>(endpoint(config.t2g.url, config.t2g.api_key_env, 120));
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  out << content;
}

}  // namespace uhoi
