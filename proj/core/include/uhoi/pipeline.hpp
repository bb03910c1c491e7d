#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/config.hpp"
#include "uhoi/metrics.hpp"
#include "uhoi/transcript.hpp"

namespace uhoi {

struct StageIssue {
  std::string subject;  // image or pair id
  std::string message;
};

struct StageSummary {
  std::string stage;
  std::size_t processed = 0;
  std::vector<StageIssue> issues;
  bool complete = true;
  std::string hint;

  bool ok() const { return complete && issues.empty(); }
};

// Fixed file names inside a run directory.
struct RunPaths {
  std::string dir;

  std::string manifest() const { return dir + "/manifest.json"; }
  std::string pairs() const { return dir + "/pairs.jsonl"; }
  std::string prompts() const { return dir + "/prompts"; }
  std::string transcript() const { return dir + "/transcript.jsonl"; }
  std::string triplets() const { return dir + "/triplets.jsonl"; }
  std::string selections() const { return dir + "/selections.jsonl"; }
  std::string predictions() const { return dir + "/predictions.json"; }
  std::string report_json() const { return dir + "/report.json"; }
  std::string report_csv() const { return dir + "/report.csv"; }
};

// <dir>/<image_id>.{png,jpg,jpeg}
std::optional<std::string> find_image(const std::string& images_dir, const std::string& image_id);

// ---- pairs ----

struct PairsStageResult {
  std::vector<PairRecord> pairs;
  StageSummary summary;
};

// Annotated-box samples pair their ground-truth boxes; computed-box samples
// pair detections after filter_detections. With an images directory each
// image must load (failures are per-sample issues and drop that image's
// pairs); with a prompts directory the visual prompt of every pair is saved
// as PNG.
PairsStageResult run_pairs(const PipelineConfig& config, const std::vector<EvalSample>& samples,
                           const std::string& images_dir, const std::string& prompts_dir);

// ---- generate ----

// Appends N samples per pair to the transcript in pair order, skipping pairs
// already complete in it (an incomplete pair is regenerated from scratch).
// Without an images directory requests are text-only. A provider failure
// stops the stage; everything delivered before it stays on disk.
StageSummary run_generate(const PipelineConfig& config, const std::vector<PairRecord>& pairs,
                          GenerationProvider& provider, const std::string& images_dir,
                          const std::string& transcript_path, ConcurrencyGauge* gauge = nullptr);

// ---- extract + aggregate ----

struct ExtractionResources {
  T2GProvider* t2g = nullptr;
  Similarity* object_similarity = nullptr;  // for similarity object matching
  const ClosedClassLexicon* lexicon = &ClosedClassLexicon::bundled();
};

std::vector<RawTriplet> extract_sample(const PipelineConfig& config, const std::string& text,
                                       const std::string& object_label, int sample_index,
                                       ExtractionResources& resources);

struct ExtractStageResult {
  std::vector<PairSelection> selections;
  StageSummary summary;
};

// Extraction, refinement and aggregation for every pair with a complete
// transcript. Writes per-sample triplets and per-pair selections when the
// paths are non-empty. Provider errors are rethrown naming the stage and pair.
ExtractStageResult run_extract(const PipelineConfig& config, const std::vector<PairRecord>& pairs,
                               const std::vector<TranscriptRecord>& transcript,
                               ExtractionResources& resources, const std::string& triplets_path,
                               const std::string& selections_path);

using PredictionMap = std::map<std::string, std::vector<PredictedInteraction>>;

PredictionMap predictions_from_selections(const std::vector<PairRecord>& pairs,
                                          const std::vector<PairSelection>& selections);

// Same layout as load_predictions reads.
nlohmann::ordered_json predictions_to_json(const PredictionMap& predictions);

// ---- evaluate ----

MetricReport evaluate_dataset(const std::vector<EvalSample>& samples,
                              const PredictionMap& predictions, const VerbVocabulary& vocabulary,
                              Similarity& sim, const EvalConfig& config,
                              const RaritySplit* split = nullptr, bool lemmatize = false,
                              StageSummary* summary = nullptr);

// Descriptive fields stored under "run" in a report.
nlohmann::ordered_json report_meta(const PipelineConfig& config, const std::string& name,
                                   const std::string& source);

// ---- providers from config ----

std::unique_ptr<GenerationProvider> make_generation_provider(const PipelineConfig& config);
std::unique_ptr<Similarity> make_similarity(const PipelineConfig& config);
// Null unless the effective extractor is t2g.
std::unique_ptr<T2GProvider> make_t2g_provider(const PipelineConfig& config);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace uhoi
