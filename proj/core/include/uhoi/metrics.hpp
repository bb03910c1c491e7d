#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/datamodel.hpp"
#include "uhoi/similarity.hpp"
#include "uhoi/vocabulary.hpp"

namespace uhoi {

enum class ClassMode { kVerb, kHoiCategory };

std::string to_string(ClassMode mode);
ClassMode parse_class_mode(std::string_view name);

std::vector<double> default_thresholds();

struct EvalConfig {
  std::vector<double> thresholds = default_thresholds();
  double iou_threshold = kDefaultIouThreshold;
  Protocol protocol = Protocol::kAnnotatedBox;
  ClassMode class_mode = ClassMode::kVerb;

  // Thresholds non-empty, strictly increasing, in (0, 1]; IoU gate in (0, 1].
  void validate() const;
  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

// Lists every field on which two configurations differ, empty if none.
std::vector<std::string> config_differences(const EvalConfig& a, const EvalConfig& b);

// Shortest decimal form, e.g. "0.6", "0.95"; used for report keys.
std::string format_threshold(double tau);

// Per-GT terms SR_g: best verb similarity (clamped at 0) among predictions
// passing the IoU gate, 0 when none does.
std::vector<double> semantic_recall_terms(const std::vector<PredictedInteraction>& predictions,
                                          const std::vector<GroundTruthInteraction>& ground_truth,
                                          const VerbVocabulary& vocabulary, Similarity& sim,
                                          double iou_threshold = kDefaultIouThreshold);

// Mean of the per-GT terms. Throws UndefinedResultError without ground truth.
double semantic_recall(const std::vector<PredictedInteraction>& predictions,
                       const std::vector<GroundTruthInteraction>& ground_truth,
                       const VerbVocabulary& vocabulary, Similarity& sim,
                       double iou_threshold = kDefaultIouThreshold);

enum class Outcome : std::uint8_t { kTruePositive, kDuplicate, kIgnored };

// Non-interpolated area under the precision/recall step curve of a ranked
// outcome list; ignored entries are skipped. Returns 0 when num_gt is 0.
double average_precision(const std::vector<Outcome>& ranked, std::size_t num_gt);

struct RankedPrediction {
  double score = 0.0;
  std::size_t prediction_index = 0;
  Outcome outcome = Outcome::kIgnored;
};

// Matching state of one image, kept so images can be pooled before AP.
struct ImageResult {
  std::string image_id;
  EvalConfig config;
  std::string vocabulary_fingerprint;
  std::map<int, std::size_t> gt_per_class;
  std::map<int, std::string> class_names;
  // Indexed like config.thresholds; entries per class in rank order.
  std::vector<std::map<int, std::vector<RankedPrediction>>> per_threshold;
  std::vector<double> sr_terms;
  std::size_t num_predictions = 0;
};

ImageResult evaluate_image(std::string image_id,
                           const std::vector<PredictedInteraction>& predictions,
                           const std::vector<GroundTruthInteraction>& ground_truth,
                           const VerbVocabulary& vocabulary, Similarity& sim,
                           const EvalConfig& config);

struct PerClassAP {
  int class_id = 0;
  std::string name;
  std::size_t num_gt = 0;
  std::optional<Rarity> rarity;
  std::vector<double> ap;  // per threshold
  std::vector<std::size_t> true_positives;
  std::vector<std::size_t> duplicates;
  std::vector<std::size_t> ignored;
};

struct SplitScore {
  std::vector<double> map_per_threshold;
  double map_avg = 0.0;
  std::size_t num_classes = 0;
};

struct MetricReport {
  EvalConfig config;
  std::string vocabulary_fingerprint;
  std::vector<double> map_per_threshold;
  double map_avg = 0.0;
  double sr = 0.0;
  std::size_t num_images = 0;
  std::size_t num_gt = 0;
  std::size_t num_predictions = 0;
  SplitScore full;
  std::optional<SplitScore> rare;
  std::optional<SplitScore> nonrare;
  std::vector<PerClassAP> per_class;
};

// Pools the ranked lists of all images per class and threshold, then
// computes AP per class, mAP over classes with ground truth, and SR over all
// ground-truth instances. Rare/non-rare splits need per-HOI-category classes
// and a split; otherwise they stay empty. Throws ConfigError on mismatched
// configurations and UndefinedResultError without ground truth.
MetricReport aggregate_report(const std::vector<ImageResult>& images,
                              const RaritySplit* split = nullptr);

// Single-image convenience over evaluate_image + aggregate_report.
MetricReport semantic_map(const std::vector<PredictedInteraction>& predictions,
                          const std::vector<GroundTruthInteraction>& ground_truth,
                          const VerbVocabulary& vocabulary, Similarity& sim,
                          const EvalConfig& config, const RaritySplit* split = nullptr);

nlohmann::ordered_json eval_config_to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const nlohmann::json& value);

// Values are fractions in [0, 1]; `meta` is stored verbatim under "run".
nlohmann::ordered_json report_to_json(const MetricReport& report,
                                      const nlohmann::ordered_json& meta = nlohmann::ordered_json::object());
MetricReport report_from_json(const nlohmann::json& value);

}  // namespace uhoi
