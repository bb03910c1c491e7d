#include "uhoi/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "uhoi/error.hpp"

namespace uhoi {

namespace {

struct PooledEntry {
  double score;
  std::size_t image_position;
  std::size_t prediction_index;
  Outcome outcome;
};

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void check_ground_truth(const std::vector<GroundTruthInteraction>& ground_truth,
                        const VerbVocabulary& vocabulary) {
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (ground_truth[g].verb_id >= vocabulary.size()) {
      throw ConfigError("ground truth #" + std::to_string(g) + " has verb id " +
                        std::to_string(ground_truth[g].verb_id) + " outside vocabulary '" +
                        vocabulary.source() + "' of size " + std::to_string(vocabulary.size()));
    }
  }
}

SplitScore split_score(const std::vector<const PerClassAP*>& classes, std::size_t num_thresholds) {
  SplitScore s;
  s.num_classes = classes.size();
  s.map_per_threshold.assign(num_thresholds, 0.0);
  for (std::size_t t = 0; t < num_thresholds; ++t) {
    std::vector<double> aps;
    for (const auto* c : classes) aps.push_back(c->ap[t]);
    s.map_per_threshold[t] = mean(aps);
  }
  s.map_avg = mean(s.map_per_threshold);
  return s;
}

nlohmann::ordered_json split_to_json(const std::optional<SplitScore>& s,
                                     const std::vector<double>& thresholds) {
  if (!s) return nullptr;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    per[format_threshold(thresholds[t])] = s->map_per_threshold[t];
  }
  return {{"map_per_threshold", per}, {"map_avg", s->map_avg}, {"num_classes", s->num_classes}};
}

std::optional<SplitScore> split_from_json(const nlohmann::json& v,
                                          const std::vector<double>& thresholds) {
  if (v.is_null()) return std::nullopt;
  SplitScore s;
  for (double tau : thresholds) {
    s.map_per_threshold.push_back(v.at("map_per_threshold").at(format_threshold(tau)).get<double>());
  }
  s.map_avg = v.at("map_avg").get<double>();
  s.num_classes = v.value("num_classes", std::size_t{0});
  return s;
}

}  // namespace

std::string to_string(ClassMode mode) {
  return mode == ClassMode::kHoiCategory ? "hoi" : "verb";
}

ClassMode parse_class_mode(std::string_view name) {
  if (name == "verb") return ClassMode::kVerb;
  if (name == "hoi") return ClassMode::kHoiCategory;
  throw ConfigError("unknown class mode '" + std::string(name) + "' (verb|hoi)");
}

std::vector<double> default_thresholds() { return {0.6, 0.7, 0.8, 0.9, 0.95}; }

void EvalConfig::validate() const {
  if (thresholds.empty()) throw ConfigError("similarity threshold set is empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double tau = thresholds[i];
    if (!(tau > 0.0 && tau <= 1.0)) {
      throw ConfigError("similarity threshold " + format_threshold(tau) + " outside (0, 1]");
    }
    if (i > 0 && !(tau > thresholds[i - 1])) {
      throw ConfigError("similarity thresholds must be strictly increasing");
    }
  }
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("IoU threshold must lie in (0, 1]");
  }
}

std::vector<std::string> config_differences(const EvalConfig& a, const EvalConfig& b) {
  std::vector<std::string> diffs;
  auto list = [](const std::vector<double>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_threshold(v[i]);
    return s + "}";
  };
  if (a.thresholds != b.thresholds) {
    diffs.push_back("thresholds " + list(a.thresholds) + " vs " + list(b.thresholds));
  }
  if (a.iou_threshold != b.iou_threshold) {
    diffs.push_back("iou_threshold " + format_threshold(a.iou_threshold) + " vs " +
                    format_threshold(b.iou_threshold));
  }
  if (a.protocol != b.protocol) {
    diffs.push_back("protocol " + to_string(a.protocol) + " vs " + to_string(b.protocol));
  }
  if (a.class_mode != b.class_mode) {
    diffs.push_back("class_mode " + to_string(a.class_mode) + " vs " + to_string(b.class_mode));
  }
  return diffs;
}

std::string format_threshold(double tau) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, tau);
  return std::string(buf, res.ptr);
}

std::vector<double> semantic_recall_terms(const std::vector<PredictedInteraction>& predictions,
                                          const std::vector<GroundTruthInteraction>& ground_truth,
                                          const VerbVocabulary& vocabulary, Similarity& sim,
                                          double iou_threshold) {
  check_ground_truth(ground_truth, vocabulary);
  std::vector<double> terms;
  terms.reserve(ground_truth.size());
  for (const auto& g : ground_truth) {
    double best = 0.0;
    for (const auto& p : predictions) {
      if (!spatial_match(p.boxes(), g.boxes(), iou_threshold)) continue;
      best = std::max(best, sim.similarity(p.verb_phrase, vocabulary.verb(g.verb_id)));
    }
    terms.push_back(std::clamp(best, 0.0, 1.0));
  }
  return terms;
}

double semantic_recall(const std::vector<PredictedInteraction>& predictions,
                       const std::vector<GroundTruthInteraction>& ground_truth,
                       const VerbVocabulary& vocabulary, Similarity& sim, double iou_threshold) {
  if (ground_truth.empty()) {
    throw UndefinedResultError("semantic recall is undefined without ground-truth interactions");
  }
  return mean(semantic_recall_terms(predictions, ground_truth, vocabulary, sim, iou_threshold));
}

double average_precision(const std::vector<Outcome>& ranked, std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  double area = 0.0;
  for (Outcome o : ranked) {
    if (o == Outcome::kIgnored) continue;
    ++seen;
    if (o == Outcome::kTruePositive) {
      ++tp;
      area += static_cast<double>(tp) / static_cast<double>(seen);
    }
  }
  return area / static_cast<double>(num_gt);
}

ImageResult evaluate_image(std::string image_id,
                           const std::vector<PredictedInteraction>& predictions,
                           const std::vector<GroundTruthInteraction>& ground_truth,
                           const VerbVocabulary& vocabulary, Similarity& sim,
                           const EvalConfig& config) {
  config.validate();
  check_ground_truth(ground_truth, vocabulary);
  const bool hoi = config.class_mode == ClassMode::kHoiCategory;

  ImageResult result;
  result.image_id = std::move(image_id);
  result.config = config;
  result.vocabulary_fingerprint = vocabulary.fingerprint();
  result.num_predictions = predictions.size();

  // Ground-truth classes; in HOI mode (verb, object) -> category comes from the annotations.
  std::map<std::pair<std::size_t, std::string>, int> hoi_of;
  std::vector<int> gt_class(ground_truth.size());
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    const auto& gt = ground_truth[g];
    int cls = static_cast<int>(gt.verb_id);
    std::string name = vocabulary.verb(gt.verb_id);
    if (hoi) {
      if (!gt.hoi_category_id) {
        throw ConfigError("image '" + result.image_id + "' ground truth #" + std::to_string(g) +
                          " has no hoi_category_id (required by class mode 'hoi')");
      }
      cls = *gt.hoi_category_id;
      name += " " + gt.object_label;
      auto [it, inserted] = hoi_of.try_emplace({gt.verb_id, gt.object_label}, cls);
      if (!inserted && it->second != cls) {
        throw ConfigError("image '" + result.image_id + "': (" + vocabulary.verb(gt.verb_id) +
                          ", " + gt.object_label + ") maps to HOI categories " +
                          std::to_string(it->second) + " and " + std::to_string(cls));
      }
    }
    gt_class[g] = cls;
    ++result.gt_per_class[cls];
    result.class_names.emplace(cls, name);
  }

  result.sr_terms = semantic_recall_terms(predictions, ground_truth, vocabulary, sim,
                                          config.iou_threshold);

  // Expansion at the loosest threshold; stricter ones filter it.
  std::unordered_map<std::string, std::vector<VocabMatch>> expansions;
  for (const auto& p : predictions) {
    if (!expansions.contains(p.verb_phrase)) {
      expansions.emplace(p.verb_phrase, map_to_vocabulary(p.verb_phrase, vocabulary,
                                                          config.thresholds.front(), sim));
    }
  }

  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].score > predictions[b].score;
  });

  result.per_threshold.resize(config.thresholds.size());
  for (std::size_t t = 0; t < config.thresholds.size(); ++t) {
    const double tau = config.thresholds[t];
    std::vector<bool> matched(ground_truth.size(), false);
    auto& classes = result.per_threshold[t];
    for (std::size_t idx : order) {
      const auto& p = predictions[idx];
      for (const auto& m : expansions.at(p.verb_phrase)) {
        if (m.similarity < tau) continue;
        int cls = static_cast<int>(m.verb_index);
        if (hoi) {
          auto it = hoi_of.find({m.verb_index, p.object_label});
          if (it == hoi_of.end()) continue;  // no ground truth of this category here
          cls = it->second;
        }
        std::optional<std::size_t> best;
        double best_overlap = -1.0;
        bool any_candidate = false;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
          if (gt_class[g] != cls) continue;
          if (!spatial_match(p.boxes(), ground_truth[g].boxes(), config.iou_threshold)) continue;
          any_candidate = true;
          if (matched[g]) continue;
          const double overlap = pair_overlap(p.boxes(), ground_truth[g].boxes());
          if (overlap > best_overlap) {
            best_overlap = overlap;
            best = g;
          }
        }
        Outcome outcome = Outcome::kIgnored;
        if (best) {
          matched[*best] = true;
          outcome = Outcome::kTruePositive;
        } else if (any_candidate) {
          outcome = Outcome::kDuplicate;
        }
        classes[cls].push_back({p.score, idx, outcome});
      }
    }
  }
  return result;
}

MetricReport aggregate_report(const std::vector<ImageResult>& images, const RaritySplit* split) {
  if (images.empty()) throw UndefinedResultError("no images to aggregate");
  const EvalConfig& config = images.front().config;
  const std::string& fingerprint = images.front().vocabulary_fingerprint;
  for (const auto& img : images) {
    auto diffs = config_differences(config, img.config);
    if (img.vocabulary_fingerprint != fingerprint) diffs.push_back("vocabulary fingerprint");
    if (!diffs.empty()) {
      std::string msg = "image '" + img.image_id + "' was evaluated with a different configuration:";
      for (const auto& d : diffs) msg += " " + d + ";";
      throw ConfigError(msg);
    }
  }

  MetricReport report;
  report.config = config;
  report.vocabulary_fingerprint = fingerprint;
  report.num_images = images.size();

  std::map<int, std::size_t> gt_per_class;
  std::map<int, std::string> names;
  std::vector<double> sr_terms;
  for (const auto& img : images) {
    for (const auto& [cls, n] : img.gt_per_class) gt_per_class[cls] += n;
    names.insert(img.class_names.begin(), img.class_names.end());
    sr_terms.insert(sr_terms.end(), img.sr_terms.begin(), img.sr_terms.end());
    report.num_predictions += img.num_predictions;
  }
  report.num_gt = sr_terms.size();
  if (report.num_gt == 0) {
    throw UndefinedResultError("no ground-truth interactions; mAP and SR are undefined");
  }
  report.sr = mean(sr_terms);

  const std::size_t nt = config.thresholds.size();
  for (const auto& [cls, n] : gt_per_class) {
    PerClassAP c;
    c.class_id = cls;
    c.name = names.at(cls);
    c.num_gt = n;
    c.ap.assign(nt, 0.0);
    c.true_positives.assign(nt, 0);
    c.duplicates.assign(nt, 0);
    c.ignored.assign(nt, 0);
    report.per_class.push_back(std::move(c));
  }

  for (std::size_t t = 0; t < nt; ++t) {
    for (auto& c : report.per_class) {
      std::vector<PooledEntry> pooled;
      for (std::size_t i = 0; i < images.size(); ++i) {
        auto it = images[i].per_threshold[t].find(c.class_id);
        if (it == images[i].per_threshold[t].end()) continue;
        for (const auto& r : it->second) {
          pooled.push_back({r.score, i, r.prediction_index, r.outcome});
        }
      }
      std::sort(pooled.begin(), pooled.end(), [](const PooledEntry& a, const PooledEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.image_position, a.prediction_index) <
               std::tie(b.image_position, b.prediction_index);
      });
      std::vector<Outcome> ranked;
      ranked.reserve(pooled.size());
      for (const auto& e : pooled) {
        ranked.push_back(e.outcome);
        if (e.outcome == Outcome::kTruePositive) ++c.true_positives[t];
        if (e.outcome == Outcome::kDuplicate) ++c.duplicates[t];
        if (e.outcome == Outcome::kIgnored) ++c.ignored[t];
      }
      c.ap[t] = average_precision(ranked, c.num_gt);
    }
  }

  std::vector<const PerClassAP*> all, rare, nonrare;
  for (auto& c : report.per_class) all.push_back(&c);
  report.full = split_score(all, nt);
  report.map_per_threshold = report.full.map_per_threshold;
  report.map_avg = report.full.map_avg;

  if (split != nullptr && config.class_mode == ClassMode::kHoiCategory) {
    for (auto& c : report.per_class) {
      c.rarity = split->assign(c.class_id);
      (*c.rarity == Rarity::kRare ? rare : nonrare).push_back(&c);
    }
    if (!rare.empty()) report.rare = split_score(rare, nt);
    if (!nonrare.empty()) report.nonrare = split_score(nonrare, nt);
  }
  return report;
}

MetricReport semantic_map(const std::vector<PredictedInteraction>& predictions,
                          const std::vector<GroundTruthInteraction>& ground_truth,
                          const VerbVocabulary& vocabulary, Similarity& sim,
                          const EvalConfig& config, const RaritySplit* split) {
  return aggregate_report({evaluate_image("image", predictions, ground_truth, vocabulary, sim,
                                          config)},
                          split);
}

nlohmann::ordered_json eval_config_to_json(const EvalConfig& config) {
  return {{"thresholds", config.thresholds},
          {"iou_threshold", config.iou_threshold},
          {"protocol", to_string(config.protocol)},
          {"class_mode", to_string(config.class_mode)}};
}

EvalConfig eval_config_from_json(const nlohmann::json& value) {
  EvalConfig c;
  c.thresholds = value.at("thresholds").get<std::vector<double>>();
  c.iou_threshold = value.at("iou_threshold").get<double>();
  c.protocol = parse_protocol(value.at("protocol").get<std::string>());
  c.class_mode = parse_class_mode(value.at("class_mode").get<std::string>());
  return c;
}

nlohmann::ordered_json report_to_json(const MetricReport& report,
                                      const nlohmann::ordered_json& meta) {
  const auto& ts = report.config.thresholds;
  nlohmann::ordered_json out;
  out["run"] = meta;
  out["config"] = eval_config_to_json(report.config);
  out["vocabulary_fingerprint"] = report.vocabulary_fingerprint;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < ts.size(); ++t) per[format_threshold(ts[t])] = report.map_per_threshold[t];
  out["map_per_threshold"] = per;
  out["map_avg"] = report.map_avg;
  out["sr"] = report.sr;
  out["splits"] = {{"full", split_to_json(report.full, ts)},
                   {"rare", split_to_json(report.rare, ts)},
                   {"nonrare", split_to_json(report.nonrare, ts)}};
  out["counts"] = {{"images", report.num_images},
                   {"ground_truth", report.num_gt},
                   {"predictions", report.num_predictions}};
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class) {
    nlohmann::ordered_json ap = nlohmann::ordered_json::object();
    for (std::size_t t = 0; t < ts.size(); ++t) ap[format_threshold(ts[t])] = c.ap[t];
    nlohmann::ordered_json row;
    row["class_id"] = c.class_id;
    row["name"] = c.name;
    row["num_gt"] = c.num_gt;
    row["rarity"] = c.rarity ? nlohmann::ordered_json(*c.rarity == Rarity::kRare ? "rare" : "nonrare")
                             : nlohmann::ordered_json(nullptr);
    row["ap"] = ap;
    row["true_positives"] = c.true_positives;
    row["duplicates"] = c.duplicates;
    row["ignored"] = c.ignored;
    classes.push_back(std::move(row));
  }
  out["per_class"] = classes;
  return out;
}

MetricReport report_from_json(const nlohmann::json& value) {
  try {
    MetricReport r;
    r.config = eval_config_from_json(value.at("config"));
    r.config.validate();
    const auto& ts = r.config.thresholds;
    r.vocabulary_fingerprint = value.value("vocabulary_fingerprint", std::string());
    for (double tau : ts) {
      r.map_per_threshold.push_back(value.at("map_per_threshold").at(format_threshold(tau)).get<double>());
    }
    r.map_avg = value.at("map_avg").get<double>();
    r.sr = value.at("sr").get<double>();
    const auto& splits = value.at("splits");
    if (auto full = split_from_json(splits.at("full"), ts)) r.full = *full;
    r.rare = split_from_json(splits.at("rare"), ts);
    r.nonrare = split_from_json(splits.at("nonrare"), ts);
    if (value.contains("counts")) {
      r.num_images = value["counts"].value("images", std::size_t{0});
      r.num_gt = value["counts"].value("ground_truth", std::size_t{0});
      r.num_predictions = value["counts"].value("predictions", std::size_t{0});
    }
    for (const auto& row : value.value("per_class", nlohmann::json::array())) {
      PerClassAP c;
      c.class_id = row.at("class_id").get<int>();
      c.name = row.at("name").get<std::string>();
      c.num_gt = row.at("num_gt").get<std::size_t>();
      if (row.contains("rarity") && row["rarity"].is_string()) {
        c.rarity = row["rarity"] == "rare" ? Rarity::kRare : Rarity::kNonRare;
      }
      for (double tau : ts) c.ap.push_back(row.at("ap").at(format_threshold(tau)).get<double>());
      c.true_positives = row.at("true_positives").get<std::vector<std::size_t>>();
      c.duplicates = row.at("duplicates").get<std::vector<std::size_t>>();
      c.ignored = row.at("ignored").get<std::vector<std::size_t>>();
      r.per_class.push_back(std::move(c));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace uhoi
