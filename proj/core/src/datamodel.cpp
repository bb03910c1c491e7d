#include "uhoi/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "uhoi/error.hpp"
#include "uhoi/text.hpp"

namespace uhoi {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string>& default_human_labels() {
  static const std::set<std::string> words = {"person", "man",   "woman", "boy",
                                              "girl",   "child", "human", "people",
                                              "guy",    "lady"};
  return words;
}

int parse_dimension(const json& value, const char* field) {
  const double v = value.get<double>();
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
    throw ValidationError(std::string(field) + " must be a positive integer");
  }
  return static_cast<int>(v);
}

void check_bounds(const BoundingBox& box, const EvalSample& sample, const std::string& where) {
  if (!box.within(sample.width, sample.height)) {
    throw ValidationError(where + ": box " + box.to_string() + " exceeds image bounds " +
                          std::to_string(sample.width) + "x" + std::to_string(sample.height));
  }
}

std::size_t resolve_verb(const json& value, const VerbVocabulary& vocabulary) {
  if (value.is_number_integer()) {
    const auto id = value.get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= vocabulary.size()) {
      throw ValidationError("verb id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(vocabulary.size()));
    }
    return static_cast<std::size_t>(id);
  }
  const auto verb = value.get<std::string>();
  auto id = vocabulary.index_of(verb);
  if (!id) throw ValidationError("verb '" + verb + "' is not in the vocabulary");
  return *id;
}

std::vector<std::size_t> order_by_score(const std::vector<Detection>& detections,
                                        const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> order = subset;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });
  return order;
}

std::vector<std::size_t> apply_filter(const std::vector<Detection>& detections,
                                      const std::vector<std::size_t>& subset,
                                      const DetectionFilter& filter) {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> rejected;
  for (std::size_t i : order_by_score(detections, subset)) {
    (detections[i].score >= filter.confidence_threshold ? kept : rejected).push_back(i);
  }
  for (std::size_t i = 0; kept.size() < filter.min_instances && i < rejected.size(); ++i) {
    kept.push_back(rejected[i]);
  }
  if (kept.size() > filter.max_instances) kept.resize(filter.max_instances);
  return kept;
}

}  // namespace

std::string to_string(Protocol protocol) {
  return protocol == Protocol::kAnnotatedBox ? "annotated" : "computed";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "annotated" || name == "annotated-box") return Protocol::kAnnotatedBox;
  if (name == "computed" || name == "computed-box") return Protocol::kComputedBox;
  throw ConfigError("unknown protocol '" + std::string(name) + "' (annotated|computed)");
}

HumanLexicon::HumanLexicon() : words_(default_human_labels()) {}

HumanLexicon::HumanLexicon(std::set<std::string> words) {
  for (const auto& w : words) {
    auto n = normalize_label(w);
    if (!n.empty()) words_.insert(std::move(n));
  }
  if (words_.empty()) throw ConfigError("human lexicon is empty");
}

HumanLexicon HumanLexicon::subjects() {
  std::set<std::string> words = default_human_labels();
  for (const char* w : {"persons",  "men",       "women",        "boys",        "girls",
                        "children", "kid",       "kids",         "humans",      "guys",
                        "ladies",   "adult",     "adults",       "baby",        "toddler",
                        "teenager", "player",    "players",      "rider",       "riders",
                        "skier",    "surfer",    "skateboarder", "snowboarder", "worker",
                        "chef",     "cook",      "driver",       "athlete",     "gentleman",
                        "someone",  "somebody",  "individual",   "user",        "customer",
                        "pedestrian", "passenger", "batter",     "catcher",     "pitcher",
                        "he",       "she"}) {
    words.insert(w);
  }
  return HumanLexicon(std::move(words));
}

bool HumanLexicon::contains(std::string_view text) const {
  const std::string n = normalize_label(text);
  if (n.empty()) return false;
  if (words_.contains(n)) return true;
  const auto space = n.rfind(' ');
  return space != std::string::npos && words_.contains(n.substr(space + 1));
}

Detection Detection::make(BoundingBox box, std::string_view label, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError("detection score " + std::to_string(score) + " outside [0, 1]");
  }
  std::string normalized = normalize_label(label);
  if (normalized.empty()) throw ValidationError("detection label is empty");
  return {box, std::move(normalized), score};
}

PredictedInteraction PredictedInteraction::make(BoundingBox human_box, BoundingBox object_box,
                                                std::string_view object_label,
                                                std::string_view verb, double score,
                                                Provenance provenance) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError("prediction score " + std::to_string(score) + " outside [0, 1]");
  }
  std::string verb_phrase = normalize_verb_phrase(verb);
  if (verb_phrase.empty()) throw ValidationError("prediction verb is empty");
  return {human_box, object_box, normalize_label(object_label), std::move(verb_phrase), score,
          std::move(provenance)};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

json box_to_json(const BoundingBox& box) { return json(box.to_array()); }

BoundingBox box_from_json(const json& value) {
  if (!value.is_array() || value.size() != 4) {
    throw ValidationError("box must be an array of 4 numbers");
  }
  std::array<double, 4> xyxy{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!value[i].is_number()) throw ValidationError("box coordinates must be numbers");
    xyxy[i] = value[i].get<double>();
  }
  return BoundingBox::from_array(xyxy);
}

std::vector<EvalSample> parse_annotations(const json& doc, Protocol protocol,
                                          const VerbVocabulary& vocabulary,
                                          const std::string& origin) {
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw ParseError(origin + ": top-level 'images' array missing");
  }
  std::vector<EvalSample> samples;
  std::set<std::string> ids;
  const json& images = doc["images"];
  for (std::size_t i = 0; i < images.size(); ++i) {
    const json& img = images[i];
    std::string where = origin + ": images[" + std::to_string(i) + "]";
    std::string field = "id";
    try {
      EvalSample sample;
      sample.image_id = img.at("id").get<std::string>();
      where += " (id '" + sample.image_id + "')";
      if (!ids.insert(sample.image_id).second) {
        throw ValidationError("duplicate image id");
      }
      field = "width";
      sample.width = parse_dimension(img.at("width"), "width");
      field = "height";
      sample.height = parse_dimension(img.at("height"), "height");

      field = "gt";
      const json& gts = img.at("gt");
      for (std::size_t g = 0; g < gts.size(); ++g) {
        const json& rec = gts[g];
        const std::string gwhere = where + " gt[" + std::to_string(g) + "]";
        field = "gt[" + std::to_string(g) + "].human_box";
        BoundingBox human = box_from_json(rec.at("human_box"));
        field = "gt[" + std::to_string(g) + "].object_box";
        BoundingBox object = box_from_json(rec.at("object_box"));
        check_bounds(human, sample, gwhere + " human_box");
        check_bounds(object, sample, gwhere + " object_box");
        field = "gt[" + std::to_string(g) + "].object_label";
        std::string label = normalize_label(rec.at("object_label").get<std::string>());
        if (label.empty()) throw ValidationError("object_label is empty");
        field = "gt[" + std::to_string(g) + "].verb";
        const std::size_t verb_id = resolve_verb(rec.at("verb"), vocabulary);
        std::optional<int> hoi;
        if (rec.contains("hoi_category_id") && !rec["hoi_category_id"].is_null()) {
          field = "gt[" + std::to_string(g) + "].hoi_category_id";
          hoi = rec["hoi_category_id"].get<int>();
        }
        sample.ground_truth.push_back({human, object, std::move(label), verb_id, hoi});
      }

      if (protocol == Protocol::kComputedBox) {
        if (img.contains("detections")) {
          const json& dets = img["detections"];
          for (std::size_t d = 0; d < dets.size(); ++d) {
            field = "detections[" + std::to_string(d) + "]";
            Detection det = Detection::make(box_from_json(dets[d].at("box")),
                                            dets[d].at("label").get<std::string>(),
                                            dets[d].at("score").get<double>());
            check_bounds(det.box, sample, where + " " + field);
            sample.detections.push_back(std::move(det));
          }
        }
      } else {
        auto add = [&](const BoundingBox& box, const std::string& label) {
          for (const auto& d : sample.detections) {
            if (d.box == box && d.label == label) return;
          }
          sample.detections.push_back({box, label, 1.0});
        };
        for (const auto& gt : sample.ground_truth) {
          add(gt.human_box, std::string(kHumanLabel));
          add(gt.object_box, gt.object_label);
        }
      }
      samples.push_back(std::move(sample));
    } catch (const ValidationError& e) {
      throw ValidationError(where + " field '" + field + "': " + e.what());
    } catch (const json::exception& e) {
      throw ParseError(where + " field '" + field + "': " + e.what());
    }
  }
  return samples;
}

std::vector<EvalSample> load_annotations(const std::string& path, Protocol protocol,
                                         const VerbVocabulary& vocabulary) {
  return parse_annotations(read_json_file(path), protocol, vocabulary, path);
}

std::string serialize_annotations(const std::vector<EvalSample>& samples, Protocol protocol,
                                  const VerbVocabulary& vocabulary) {
  ordered_json images = ordered_json::array();
  for (const auto& s : samples) {
    ordered_json img;
    img["id"] = s.image_id;
    img["width"] = s.width;
    img["height"] = s.height;
    ordered_json gts = ordered_json::array();
    for (const auto& g : s.ground_truth) {
      ordered_json rec;
      rec["human_box"] = g.human_box.to_array();
      rec["object_box"] = g.object_box.to_array();
      rec["object_label"] = g.object_label;
      rec["verb"] = vocabulary.verb(g.verb_id);
      if (g.hoi_category_id) rec["hoi_category_id"] = *g.hoi_category_id;
      gts.push_back(std::move(rec));
    }
    img["gt"] = std::move(gts);
    if (protocol == Protocol::kComputedBox) {
      ordered_json dets = ordered_json::array();
      for (const auto& d : s.detections) {
        ordered_json rec;
        rec["box"] = d.box.to_array();
        rec["label"] = d.label;
        rec["score"] = d.score;
        dets.push_back(std::move(rec));
      }
      img["detections"] = std::move(dets);
    }
    images.push_back(std::move(img));
  }
  ordered_json doc;
  doc["images"] = std::move(images);
  return doc.dump(2) + "\n";
}

std::vector<Detection> filter_detections(const std::vector<Detection>& detections,
                                         const DetectionFilter& filter,
                                         const HumanLexicon& humans) {
  if (filter.min_instances > filter.max_instances) {
    throw ConfigError("detection filter: min_instances > max_instances");
  }
  std::vector<std::size_t> selected;
  if (filter.pool == InstancePool::kJoint) {
    std::vector<std::size_t> all(detections.size());
    std::iota(all.begin(), all.end(), 0);
    selected = apply_filter(detections, all, filter);
  } else {
    std::vector<std::size_t> human_idx;
    std::vector<std::size_t> other_idx;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      (humans.contains(detections[i].label) ? human_idx : other_idx).push_back(i);
    }
    selected = apply_filter(detections, human_idx, filter);
    const auto others = apply_filter(detections, other_idx, filter);
    selected.insert(selected.end(), others.begin(), others.end());
    std::sort(selected.begin(), selected.end());
    selected = order_by_score(detections, selected);
  }
  std::vector<Detection> out;
  out.reserve(selected.size());
  for (std::size_t i : selected) out.push_back(detections[i]);
  return out;
}

RaritySplit::RaritySplit(std::set<int> rare, std::set<int> nonrare)
    : rare_(std::move(rare)), nonrare_(std::move(nonrare)) {
  for (int id : rare_) {
    if (nonrare_.contains(id)) {
      throw ValidationError("HOI category " + std::to_string(id) +
                            " is listed as both rare and non-rare");
    }
  }
}

RaritySplit RaritySplit::load(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    return RaritySplit(doc.at("rare").get<std::set<int>>(),
                       doc.at("nonrare").get<std::set<int>>());
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Rarity RaritySplit::assign(int id) const {
  if (rare_.contains(id)) return Rarity::kRare;
  if (nonrare_.contains(id)) return Rarity::kNonRare;
  throw ConfigError("HOI category " + std::to_string(id) + " is not in the rarity split");
}

Rarity RaritySplit::assign(const GroundTruthInteraction& gt) const {
  if (!gt.hoi_category_id) {
    throw ConfigError("ground-truth interaction has no hoi_category_id for rarity assignment");
  }
  return assign(*gt.hoi_category_id);
}

Rarity assign_rarity(const GroundTruthInteraction& gt, const RaritySplit& split) {
  return split.assign(gt);
}

std::map<std::string, std::vector<PredictedInteraction>> parse_predictions(
    const json& doc, const std::string& origin) {
  if (!doc.is_object() || !doc.contains("predictions") || !doc["predictions"].is_array()) {
    throw ParseError(origin + ": top-level 'predictions' array missing");
  }
  std::map<std::string, std::vector<PredictedInteraction>> out;
  const json& preds = doc["predictions"];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string where = origin + ": predictions[" + std::to_string(i) + "]";
    try {
      const json& p = preds[i];
      Provenance prov{-1, p.value("source", std::string("external"))};
      out[p.at("image_id").get<std::string>()].push_back(PredictedInteraction::make(
          box_from_json(p.at("human_box")), box_from_json(p.at("object_box")),
          p.at("object_label").get<std::string>(), p.at("verb").get<std::string>(),
          p.at("score").get<double>(), std::move(prov)));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::vector<PredictedInteraction>> load_predictions(
    const std::string& path) {
  return parse_predictions(read_json_file(path), path);
}

}  // namespace uhoi
