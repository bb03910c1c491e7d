// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any failure.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "corpus.hpp"
#include "e2e.hpp"
#include "instances.hpp"
#include "oracles.hpp"
#include "uhoi/aggregation.hpp"
#include "uhoi/config.hpp"
#include "uhoi/metrics.hpp"
#include "uhoi/pipeline.hpp"
#include "uhoi/report.hpp"
#include "uhoi/rng.hpp"
#include "uhoi/transcript.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail.str("");
    if (!pass) detail << "; ";
    pass = false;
    detail << why;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("uhoi_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::shared_ptr<uhoi::TsvEmbeddingBackend> fixture_backend() {
  static auto backend = uhoi::TsvEmbeddingBackend::load(fixtures::fixture_path("embeddings.tsv"));
  return backend;
}

oracle::Box to_oracle(const uhoi::BoundingBox& b) {
  return {b.x_min(), b.y_min(), b.x_max(), b.y_max()};
}

// Dataset + predictions in the oracle's plain representation.
std::vector<oracle::Image> oracle_images(const std::vector<uhoi::EvalSample>& samples,
                                         const uhoi::PredictionMap& predictions) {
  std::vector<oracle::Image> out;
  for (const auto& s : samples) {
    oracle::Image img;
    for (const auto& g : s.ground_truth) {
      img.gt.push_back({to_oracle(g.human_box), to_oracle(g.object_box), g.object_label, g.verb_id,
                        g.hoi_category_id.value_or(0)});
    }
    if (auto it = predictions.find(s.image_id); it != predictions.end()) {
      for (const auto& p : it->second) {
        img.preds.push_back({to_oracle(p.human_box), to_oracle(p.object_box), p.object_label,
                             p.verb_phrase, p.score});
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

// ---- 1 ----------------------------------------------------------------

Verdict metric_oracle_equivalence() {
  Verdict v;
  const auto start = Clock::now();
  uhoi::EmbeddingSimilarity sim(fixture_backend());
  const oracle::SimFn fn = [&](const std::string& a, const std::string& b) {
    return sim.similarity(a, b);
  };
  const auto verbs = fixtures::vocab_verbs();
  const uhoi::VerbVocabulary vocabulary(verbs, "fixture");
  double worst = 0.0;
  std::size_t sr_mismatches = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto image = fixtures::random_image(seed);
    uhoi::EvalConfig config;
    const bool hoi = seed % 2 == 1;
    if (hoi) config.class_mode = uhoi::ClassMode::kHoiCategory;
    const auto r = uhoi::semantic_map(fixtures::to_predictions(image),
                                      fixtures::to_ground_truth(image), vocabulary, sim, config);
    const auto o = oracle::semantic_map({image}, verbs, fn, config.thresholds, 0.5, hoi);
    for (std::size_t t = 0; t < o.map.size(); ++t) {
      worst = std::max(worst, std::abs(r.map_per_threshold[t] - o.map[t]));
    }
    worst = std::max(worst, std::abs(r.map_avg - o.map_avg));
    const double sr = oracle::semantic_recall({image}, verbs, fn, 0.5);
    if (r.sr != sr) {
      if (sr_mismatches == 0) v.fail("SR differs at seed " + std::to_string(seed));
      ++sr_mismatches;
    }
  }
  const double elapsed = seconds_since(start);
  if (worst > 1e-9) v.fail("max |mAP - oracle| = " + fmt(worst));
  if (elapsed >= 30.0) v.fail("took " + fmt(elapsed) + " s");
  if (v.pass) {
    v.detail << "500 instances, max |mAP - oracle| = " << worst << ", SR exact, " << elapsed
             << " s";
  }
  return v;
}

// ---- 2 ----------------------------------------------------------------

Verdict closed_vocabulary_reduction() {
  Verdict v;
  using uhoi::BoundingBox;
  const uhoi::VerbVocabulary vocabulary({"ride", "hold", "sit on"}, "closed");
  const BoundingBox h1{0, 0, 10, 20}, o1{5, 5, 20, 20}, h2{50, 50, 60, 70}, o2{55, 55, 70, 70};
  const BoundingBox far{80, 0, 90, 10};
  auto gt = [](BoundingBox h, BoundingBox o, std::size_t verb) {
    return uhoi::GroundTruthInteraction{h, o, "bike", verb, std::nullopt};
  };
  auto pred = [](BoundingBox h, BoundingBox o, const char* verb, double score) {
    return uhoi::PredictedInteraction::make(h, o, "bike", verb, score);
  };
  std::vector<uhoi::EvalSample> samples(3);
  uhoi::PredictionMap predictions;
  samples[0].image_id = "a";
  samples[0].ground_truth = {gt(h1, o1, 0), gt(h2, o2, 0), gt(h1, o1, 1)};
  predictions["a"] = {pred(h1, o1, "ride", 0.9), pred(h1, o1, "ride", 0.8),
                      pred(h1, o1, "hold", 0.7), pred(far, far, "ride", 0.6)};
  samples[1].image_id = "b";
  samples[1].ground_truth = {gt(h1, o1, 0)};
  predictions["b"] = {pred(h1, o1, "ride", 0.85), pred(h1, o1, "hold", 0.95)};
  samples[2].image_id = "c";
  samples[2].ground_truth = {gt(h1, o1, 1), gt(h2, o2, 1)};
  predictions["c"] = {pred(h1, o1, "hold", 0.8), pred(h1, o1, "hold", 0.72),
                      pred(h2, o2, "hold", 0.6), pred(h1, o1, "ride", 0.99)};

  // ride, pooled by score: TP(a) 0.9, TP(b) 0.85, dup(a) 0.8; 3 GT
  //   AP = 1/3 * 1 + 1/3 * 1 = 2/3
  // hold: TP(c) 0.8, dup(c) 0.72, TP(a) 0.7, TP(c) 0.6; 3 GT
  //   AP = 1/3 * 1 + 1/3 * 2/3 + 1/3 * 3/4 = 29/36
  // sit on has no GT and is left out of the mean.
  const double ride = 2.0 / 3.0, hold = 29.0 / 36.0, expected = (ride + hold) / 2.0;

  uhoi::ExactMatchSimilarity sim;
  uhoi::EvalConfig config;
  config.thresholds = {1.0};
  const auto r = uhoi::evaluate_dataset(samples, predictions, vocabulary, sim, config);
  double got_ride = -1, got_hold = -1;
  for (const auto& c : r.per_class) {
    if (c.class_id == 0) got_ride = c.ap[0];
    if (c.class_id == 1) got_hold = c.ap[0];
  }
  if (std::abs(got_ride - ride) > 1e-9) v.fail("AP(ride) = " + fmt(got_ride) + ", expected 2/3");
  if (std::abs(got_hold - hold) > 1e-9) v.fail("AP(hold) = " + fmt(got_hold) + ", expected 29/36");
  if (std::abs(r.map_avg - expected) > 1e-9) {
    v.fail("mAP = " + fmt(r.map_avg) + ", expected 53/72");
  }
  if (v.pass) v.detail << "mAP = " << r.map_avg << " = 53/72 on the 3-image fixture";
  return v;
}

// ---- 3 ----------------------------------------------------------------

Verdict protocol_constants() {
  Verdict v;
  const uhoi::PipelineConfig c;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) v.fail(what);
  };
  expect(c.eval.thresholds == std::vector<double>{0.6, 0.7, 0.8, 0.9, 0.95}, "thresholds");
  expect(c.eval.iou_threshold == 0.5, "IoU gate");
  expect(c.detection.confidence_threshold == 0.2, "detection confidence");
  expect(c.detection.min_instances == 3, "min instances");
  expect(c.detection.max_instances == 15, "max instances");
  expect(c.temperature == 0.2, "temperature");
  expect(c.num_generations == 64, "N");
  expect(c.top_k == 10, "k");
  expect(c.max_tokens == 2048, "max tokens");

  // the snapshot must also survive serialization
  const auto j = uhoi::PipelineConfig::from_json(nlohmann::json::object()).to_json();
  expect(j == c.to_json(), "empty config differs from defaults");
  expect(j["eval"]["thresholds"].get<std::vector<double>>() ==
             std::vector<double>{0.6, 0.7, 0.8, 0.9, 0.95},
         "serialized T");
  expect(j["eval"]["iou_threshold"] == 0.5 && j["temperature"] == 0.2 &&
             j["num_generations"] == 64 && j["top_k"] == 10 && j["max_tokens"] == 2048 &&
             j["detection"]["confidence_threshold"] == 0.2 &&
             j["detection"]["min_instances"] == 3 && j["detection"]["max_instances"] == 15,
         "serialized constants");
  if (v.pass) v.detail << "T, IoU 0.5, conf 0.2, 3..15 instances, temp 0.2, N 64, k 10, 2048 tokens";
  return v;
}

// ---- 4 ----------------------------------------------------------------

Verdict refinement_fixtures() {
  Verdict v;
  const auto start = Clock::now();
  const auto corpus = fixtures::load_refinement_corpus();
  std::size_t ok = 0;
  for (const auto& c : corpus) {
    if (fixtures::extract_and_refine(c) == c.expected) {
      ++ok;
    } else {
      v.fail("case " + c.id);
    }
  }
  const double elapsed = seconds_since(start);
  if (corpus.size() != 30) v.fail("corpus has " + std::to_string(corpus.size()) + " cases");
  if (elapsed >= 5.0) v.fail("took " + fmt(elapsed) + " s");
  if (v.pass) v.detail << ok << "/" << corpus.size() << " cases, " << elapsed << " s";
  return v;
}

// ---- 5 ----------------------------------------------------------------

uhoi::TripletFrequency counts(const std::vector<std::pair<std::string, int>>& verbs) {
  std::vector<std::vector<uhoi::RawTriplet>> samples;
  for (const auto& [verb, n] : verbs) {
    for (int i = 0; i < n; ++i) {
      uhoi::RawTriplet t;
      uhoi::make_triplet("person", verb, "bike", uhoi::TripletSource::kRuleBased,
                         static_cast<int>(samples.size()), t);
      samples.push_back({t});
    }
  }
  return uhoi::pool(samples);
}

std::string selection_bytes(const std::vector<uhoi::ScoredTriplet>& selected) {
  uhoi::PairSelection s;
  s.pair_id = "p";
  s.strategy = uhoi::AggregationStrategy::kSampling;
  s.k = static_cast<int>(selected.size());
  s.selected = selected;
  return uhoi::selection_to_json(s).dump();
}

Verdict aggregation_properties() {
  Verdict v;
  struct TopKCase {
    std::vector<std::pair<std::string, int>> counts;
    int k;
    std::vector<std::string> expected;
  };
  const std::vector<TopKCase> cases = {
      {{{"ride", 3}, {"hold", 2}, {"walk", 1}}, 2, {"ride", "hold"}},
      {{{"walk", 1}, {"feed", 1}, {"pet", 1}}, 2, {"feed", "pet"}},
      {{{"ride", 2}, {"hold", 2}, {"kick", 5}}, 3, {"kick", "hold", "ride"}},
      {{{"ride", 1}}, 4, {"ride"}},
      {{{"sit on", 2}, {"sit", 2}, {"ride", 1}}, 2, {"sit on", "sit"}},
  };
  for (const auto& c : cases) {
    const auto f = counts(c.counts);
    for (int run = 0; run < 3; ++run) {
      std::vector<std::string> got;
      for (const auto& s : uhoi::select_topk(f, c.k)) got.push_back(s.triplet.verb);
      if (got != c.expected) {
        v.fail("top-k order for k=" + std::to_string(c.k) + " on " + c.expected.front());
        break;
      }
    }
  }

  const auto mixed = counts({{"ride", 5}, {"hold", 3}, {"walk", 2}, {"feed", 1}, {"pet", 1}});
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    const auto first = selection_bytes(uhoi::select_sampling(mixed, 3, seed));
    for (int run = 1; run < 3; ++run) {
      if (selection_bytes(uhoi::select_sampling(mixed, 3, seed)) != first) {
        v.fail("sampling not reproducible for seed " + std::to_string(seed));
      }
    }
  }

  const auto ab = counts({{"ride", 3}, {"hold", 1}});
  const int trials = 10000;
  int a = 0;
  for (int s = 0; s < trials; ++s) {
    a += uhoi::select_sampling(ab, 1, uhoi::derive_seed(2024, std::to_string(s)))[0].triplet.verb ==
         "ride";
  }
  const double freq = static_cast<double>(a) / trials;
  if (std::abs(freq - 0.75) > 0.02) v.fail("P(a) = " + fmt(freq));
  if (v.pass) {
    v.detail << cases.size() << " top-k fixtures, sampling byte-identical x3, P(a) = " << freq;
  }
  return v;
}

// ---- 6 ----------------------------------------------------------------

Verdict end_to_end_determinism() {
  Verdict v;
  const auto dir = scratch("e2e");
  std::ostringstream log;
  const auto start = Clock::now();
  const auto report_path = fixtures::run_e2e_pipeline((dir / "run").string(), log);
  const double elapsed = seconds_since(start);
  const auto golden = read_file(fixtures::e2e_golden_path());
  if (golden.empty()) v.fail("golden report missing");
  if (read_file(report_path) != golden) v.fail("report differs from golden");
  if (elapsed >= 60.0) v.fail("took " + fmt(elapsed) + " s");

  // The golden numbers against the oracle recomputed from the run's predictions.
  const auto e2e = fixtures::fixture_path("e2e");
  const auto vocabulary = uhoi::VerbVocabulary::load(e2e + "/vocab.txt");
  const auto samples =
      uhoi::load_annotations(e2e + "/annotations.json", uhoi::Protocol::kAnnotatedBox, vocabulary);
  const auto predictions = uhoi::load_predictions((dir / "run" / "predictions.json").string());
  const auto split = uhoi::RaritySplit::load(e2e + "/split.json");
  const oracle::EmbeddingTable table(fixtures::fixture_path("embeddings.tsv"));
  const oracle::SimFn fn = [&](const std::string& a, const std::string& b) {
    return table.cosine(a, b);
  };
  const auto images = oracle_images(samples, predictions);
  const auto g = nlohmann::json::parse(golden);
  const auto thresholds = g["config"]["thresholds"].get<std::vector<double>>();
  const auto o = oracle::semantic_map(images, vocabulary.verbs(), fn, thresholds, 0.5, true,
                                      &split.rare_ids());
  double worst = 0.0;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const auto key = uhoi::format_threshold(thresholds[t]);
    worst = std::max(worst, std::abs(g["map_per_threshold"][key].get<double>() - o.map[t]));
    worst = std::max(worst, std::abs(g["splits"]["rare"]["map_per_threshold"][key].get<double>() -
                                     (*o.rare)[t]));
    worst = std::max(worst,
                     std::abs(g["splits"]["nonrare"]["map_per_threshold"][key].get<double>() -
                              (*o.nonrare)[t]));
  }
  worst = std::max(worst, std::abs(g["map_avg"].get<double>() - o.map_avg));
  const double sr = oracle::semantic_recall(images, vocabulary.verbs(), fn, 0.5);
  worst = std::max(worst, std::abs(g["sr"].get<double>() - sr));
  if (worst > 1e-9) v.fail("golden vs oracle differ by " + fmt(worst));
  if (v.pass) {
    v.detail << "byte-identical to golden in " << elapsed << " s; golden vs oracle max diff "
             << worst << " (mAP avg " << g["map_avg"].get<double>() * 100 << ")";
  }
  return v;
}

// ---- 7 ----------------------------------------------------------------

Verdict monotonicity() {
  Verdict v;
  uhoi::EmbeddingSimilarity sim(fixture_backend());
  const uhoi::VerbVocabulary vocabulary(fixtures::vocab_verbs(), "fixture");
  const auto pool = fixtures::predicted_verb_pool();
  uhoi::EvalConfig config;
  config.thresholds = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
  std::size_t map_violations = 0, sr_violations = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto image = fixtures::random_image(10000 + seed);
    const auto gt = fixtures::to_ground_truth(image);
    const auto r = uhoi::semantic_map(fixtures::to_predictions(image), gt, vocabulary, sim, config);
    for (std::size_t t = 1; t < r.map_per_threshold.size(); ++t) {
      if (r.map_per_threshold[t] > r.map_per_threshold[t - 1] + 1e-12) {
        if (map_violations == 0) {
          v.fail("mAP rises from tau " + fmt(config.thresholds[t - 1]) + " to " +
                 fmt(config.thresholds[t]) + " at seed " + std::to_string(10000 + seed));
        }
        ++map_violations;
        break;
      }
    }
    // add predictions one at a time; SR never drops
    uhoi::Xoshiro256 rng(seed);
    double previous = uhoi::semantic_recall({}, gt, vocabulary, sim);
    std::vector<uhoi::PredictedInteraction> preds;
    for (const auto& p : fixtures::to_predictions(image)) {
      preds.push_back(p);
      auto extra = p;
      extra.verb_phrase = pool[rng.below(pool.size())];
      preds.push_back(extra);
      const double sr = uhoi::semantic_recall(preds, gt, vocabulary, sim);
      if (sr < previous) {
        if (sr_violations == 0) v.fail("SR drops at seed " + std::to_string(seed));
        ++sr_violations;
      }
      previous = sr;
    }
  }
  if (v.pass) v.detail << "200 instances, 7 thresholds, mAP non-increasing, SR non-decreasing";
  else v.detail << " (" << map_violations << " mAP and " << sr_violations << " SR violations)";
  return v;
}

// ---- 8 ----------------------------------------------------------------

// Shrinks the human box about its centre until it overlaps no ground-truth
// human box with IoU >= 0.5.
uhoi::BoundingBox shrink_out_of_gate(uhoi::BoundingBox box,
                                     const std::vector<uhoi::GroundTruthInteraction>& gt) {
  auto passes = [&](const uhoi::BoundingBox& b) {
    return std::any_of(gt.begin(), gt.end(),
                       [&](const auto& g) { return uhoi::iou(b, g.human_box) >= 0.5; });
  };
  while (passes(box)) {
    const double cx = (box.x_min() + box.x_max()) / 2, cy = (box.y_min() + box.y_max()) / 2;
    const double hw = box.width() * 0.45, hh = box.height() * 0.45;
    box = uhoi::BoundingBox(cx - hw, cy - hh, cx + hw, cy + hh);
  }
  return box;
}

bool same_metrics(const uhoi::MetricReport& a, const uhoi::MetricReport& b) {
  return a.map_per_threshold == b.map_per_threshold && a.map_avg == b.map_avg && a.sr == b.sr;
}

Verdict iou_gate_perturbation() {
  Verdict v;
  uhoi::EmbeddingSimilarity sim(fixture_backend());
  const uhoi::VerbVocabulary vocabulary(fixtures::vocab_verbs(), "fixture");
  std::size_t checked = 0;

  auto check = [&](const std::vector<uhoi::PredictedInteraction>& preds,
                   const std::vector<uhoi::GroundTruthInteraction>& gt, const std::string& where) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool matched = std::any_of(gt.begin(), gt.end(), [&](const auto& g) {
        return uhoi::spatial_match(preds[i].boxes(), g.boxes());
      });
      if (!matched) continue;
      auto shrunk = preds;
      shrunk[i].human_box = shrink_out_of_gate(preds[i].human_box, gt);
      auto removed = preds;
      removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(i));
      const auto a = uhoi::semantic_map(shrunk, gt, vocabulary, sim, {});
      const auto b = uhoi::semantic_map(removed, gt, vocabulary, sim, {});
      if (!same_metrics(a, b)) v.fail(where + " prediction " + std::to_string(i));
      ++checked;
    }
  };

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto image = fixtures::random_image(20000 + seed);
    check(fixtures::to_predictions(image), fixtures::to_ground_truth(image),
          "seed " + std::to_string(20000 + seed));
  }
  // every annotated image of the end-to-end fixture with one exact prediction per GT
  const auto e2e = fixtures::fixture_path("e2e");
  const auto e2e_vocab = uhoi::VerbVocabulary::load(e2e + "/vocab.txt");
  for (const auto& s :
       uhoi::load_annotations(e2e + "/annotations.json", uhoi::Protocol::kAnnotatedBox, e2e_vocab)) {
    std::vector<uhoi::PredictedInteraction> preds;
    double score = 1.0;
    for (const auto& g : s.ground_truth) {
      preds.push_back(uhoi::PredictedInteraction::make(g.human_box, g.object_box, g.object_label,
                                                       e2e_vocab.verb(g.verb_id), score));
      score -= 0.05;
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      auto shrunk = preds;
      shrunk[i].human_box = shrink_out_of_gate(preds[i].human_box, s.ground_truth);
      auto removed = preds;
      removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(i));
      const auto a = uhoi::semantic_map(shrunk, s.ground_truth, e2e_vocab, sim, {});
      const auto b = uhoi::semantic_map(removed, s.ground_truth, e2e_vocab, sim, {});
      const auto full = uhoi::semantic_map(preds, s.ground_truth, e2e_vocab, sim, {});
      if (!same_metrics(a, b)) v.fail(s.image_id + " prediction " + std::to_string(i));
      if (!(a.sr < full.sr)) v.fail(s.image_id + " shrinking kept SR");
      ++checked;
    }
  }
  if (v.pass) v.detail << checked << " matched predictions pushed below the gate";
  return v;
}

// ---- 9 ----------------------------------------------------------------

Verdict baseline_ingestion() {
  Verdict v;
  const auto dir = scratch("baseline");
  const auto e2e = fixtures::fixture_path("e2e");
  std::ostringstream out, err;
  const int rc = uhoi::cli::run(
      {"evaluate", "--annotations", e2e + "/annotations.json", "--vocab", e2e + "/vocab.txt",
       "--split", e2e + "/split.json", "--class-mode", "hoi", "--predictions",
       e2e + "/baseline_predictions.json", "--name", "baseline", "--out", dir.string(), "-c",
       e2e + "/config.json"},
      out, err);
  if (rc != 0) {
    v.fail("evaluate exited " + std::to_string(rc) + ": " + err.str());
    return v;
  }
  for (const char* stage_file : {"pairs.jsonl", "transcript.jsonl", "selections.jsonl"}) {
    if (fs::exists(dir / stage_file)) v.fail(std::string("generation artifact ") + stage_file);
  }
  const auto report = nlohmann::json::parse(read_file((dir / "report.json").string()));
  if (report["run"]["source"] != "predictions") v.fail("run.source is not predictions");

  const auto vocabulary = uhoi::VerbVocabulary::load(e2e + "/vocab.txt");
  const auto samples =
      uhoi::load_annotations(e2e + "/annotations.json", uhoi::Protocol::kAnnotatedBox, vocabulary);
  const auto predictions = uhoi::load_predictions(e2e + "/baseline_predictions.json");
  for (const auto& [image, preds] : predictions) {
    for (const auto& p : preds) {
      if (!vocabulary.index_of(p.verb_phrase)) v.fail("baseline verb outside vocabulary");
    }
  }
  const auto split = uhoi::RaritySplit::load(e2e + "/split.json");
  const oracle::EmbeddingTable table(fixtures::fixture_path("embeddings.tsv"));
  const oracle::SimFn fn = [&](const std::string& a, const std::string& b) {
    return table.cosine(a, b);
  };
  const auto o = oracle::semantic_map(oracle_images(samples, predictions), vocabulary.verbs(), fn,
                                      uhoi::default_thresholds(), 0.5, true, &split.rare_ids());
  const double got = report["map_avg"].get<double>();
  if (std::abs(got - o.map_avg) > 1e-9) v.fail("mAP " + fmt(got) + " vs oracle " + fmt(o.map_avg));
  const auto reloaded = uhoi::load_named_report((dir / "report.json").string());
  if (reloaded.name != "baseline") v.fail("report name");
  if (v.pass) {
    v.detail << "baseline evaluated from predictions only: Full mAP " << got * 100 << ", SR "
             << report["sr"].get<double>() * 100;
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"metric-oracle equivalence", metric_oracle_equivalence},
      {"closed-vocabulary reduction", closed_vocabulary_reduction},
      {"protocol constants", protocol_constants},
      {"refinement fixtures", refinement_fixtures},
      {"aggregation properties", aggregation_properties},
      {"end-to-end determinism", end_to_end_determinism},
      {"monotonicity", monotonicity},
      {"IoU-gate perturbation", iou_gate_perturbation},
      {"external-baseline ingestion", baseline_ingestion},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": "
              << v.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
