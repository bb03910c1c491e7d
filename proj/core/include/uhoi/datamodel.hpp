#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/geometry.hpp"
#include "uhoi/vocabulary.hpp"

namespace uhoi {

enum class Protocol { kAnnotatedBox, kComputedBox };

std::string to_string(Protocol protocol);
Protocol parse_protocol(std::string_view name);

inline constexpr std::string_view kHumanLabel = "person";

// Words that mark a detection label or a triplet subject as a human.
class HumanLexicon {
 public:
  HumanLexicon();  // default detector-label list
  explicit HumanLexicon(std::set<std::string> words);

  // Default for triplet subjects: the detector list plus plurals and common
  // role nouns (rider, player, ...) and the pronouns "he" and "she".
  static HumanLexicon subjects();

  // True if the normalized text, or its last word, is in the lexicon.
  bool contains(std::string_view text) const;
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

struct Detection {
  BoundingBox box;
  std::string label;  // normalized
  double score = 1.0;

  // Normalizes the label and validates score in [0, 1] and a non-empty label.
  static Detection make(BoundingBox box, std::string_view label, double score);
};

struct GroundTruthInteraction {
  BoundingBox human_box;
  BoundingBox object_box;
  std::string object_label;
  std::size_t verb_id = 0;
  std::optional<int> hoi_category_id;

  BoxPair boxes() const { return {human_box, object_box}; }
};

struct Provenance {
  int generation_index = -1;  // -1: not produced by the generation stage
  std::string rule;           // extraction rule / source id
};

struct PredictedInteraction {
  BoundingBox human_box;
  BoundingBox object_box;
  std::string object_label;
  std::string verb_phrase;  // normalized, free-form
  double score = 1.0;
  Provenance provenance;

  static PredictedInteraction make(BoundingBox human_box, BoundingBox object_box,
                                   std::string_view object_label, std::string_view verb,
                                   double score, Provenance provenance = {});

  BoxPair boxes() const { return {human_box, object_box}; }
};

struct EvalSample {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<GroundTruthInteraction> ground_truth;
  std::vector<Detection> detections;
};

// Parses the canonical annotation JSON. Ground-truth verbs are resolved
// against `vocabulary`. For the annotated-box protocol, detections are the
// de-duplicated ground-truth boxes with score 1 (humans labelled "person");
// for the computed-box protocol they come from the file.
std::vector<EvalSample> parse_annotations(const nlohmann::json& doc, Protocol protocol,
                                          const VerbVocabulary& vocabulary,
                                          const std::string& origin = "annotations");
std::vector<EvalSample> load_annotations(const std::string& path, Protocol protocol,
                                         const VerbVocabulary& vocabulary);

// Canonical form: schema key order, two-space indent, trailing newline.
// Annotated-box samples omit the synthesized detections.
std::string serialize_annotations(const std::vector<EvalSample>& samples, Protocol protocol,
                                  const VerbVocabulary& vocabulary);

enum class InstancePool { kJoint, kPerClass };

struct DetectionFilter {
  double confidence_threshold = 0.2;
  std::size_t min_instances = 3;
  std::size_t max_instances = 15;
  InstancePool pool = InstancePool::kJoint;
};

// Keep detections scoring >= threshold; if fewer than min survive, backfill
// with the best rejected ones; truncate to max. Output is sorted by score,
// descending, ties in input order. With kPerClass the rule runs separately
// on human and non-human detections before merging.
std::vector<Detection> filter_detections(const std::vector<Detection>& detections,
                                         const DetectionFilter& filter,
                                         const HumanLexicon& humans = HumanLexicon());

enum class Rarity { kRare, kNonRare };

class RaritySplit {
 public:
  // Throws ValidationError when the sets overlap.
  RaritySplit(std::set<int> rare, std::set<int> nonrare);

  // JSON: { "rare": [ids], "nonrare": [ids] }
  static RaritySplit load(const std::string& path);

  // Throws ConfigError for a missing or unknown category id.
  Rarity assign(const GroundTruthInteraction& gt) const;
  Rarity assign(int hoi_category_id) const;

  const std::set<int>& rare_ids() const { return rare_; }
  const std::set<int>& nonrare_ids() const { return nonrare_; }
  std::size_t full_size() const { return rare_.size() + nonrare_.size(); }
  bool contains(int id) const { return rare_.contains(id) || nonrare_.contains(id); }

 private:
  std::set<int> rare_;
  std::set<int> nonrare_;
};

Rarity assign_rarity(const GroundTruthInteraction& gt, const RaritySplit& split);

// External predictions, keyed by image id:
// { "predictions": [ { "image_id", "human_box", "object_box", "object_label",
//                      "verb", "score" } ] }
std::map<std::string, std::vector<PredictedInteraction>> parse_predictions(
    const nlohmann::json& doc, const std::string& origin = "predictions");
std::map<std::string, std::vector<PredictedInteraction>> load_predictions(
    const std::string& path);

nlohmann::json box_to_json(const BoundingBox& box);
BoundingBox box_from_json(const nlohmann::json& value);

nlohmann::json read_json_file(const std::string& path);

}  // namespace uhoi
