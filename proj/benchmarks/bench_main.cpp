#include <benchmark/benchmark.h>

#include "uhoi/aggregation.hpp"
#include "uhoi/extraction.hpp"
#include "uhoi/geometry.hpp"
#include "uhoi/metrics.hpp"
#include "uhoi/rng.hpp"

namespace {

uhoi::BoundingBox random_box(uhoi::Xoshiro256& rng) {
  const double x = static_cast<double>(rng.below(80)), y = static_cast<double>(rng.below(80));
  return {x, y, x + 1 + static_cast<double>(rng.below(40)), y + 1 + static_cast<double>(rng.below(40))};
}

void BM_Iou(benchmark::State& state) {
  uhoi::Xoshiro256 rng(1);
  std::vector<uhoi::BoundingBox> boxes;
  for (int i = 0; i < 1024; ++i) boxes.push_back(random_box(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(uhoi::iou(boxes[i & 1023], boxes[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_SemanticMap(benchmark::State& state) {
  auto sim = uhoi::EmbeddingSimilarity(uhoi::TsvEmbeddingBackend::load(UHOI_EMBEDDINGS));
  const uhoi::VerbVocabulary vocab({"ride", "sit on", "hold", "carry", "drink with", "feed", "walk",
                                    "kick", "look at", "throw", "hug", "pet"},
                                   "bench");
  const std::vector<std::string> verbs = {"ride", "rides", "riding", "hold", "holds", "carry",
                                          "feed", "walk", "kick", "pet", "hug", "throw"};
  uhoi::Xoshiro256 rng(2);
  std::vector<uhoi::GroundTruthInteraction> gt;
  std::vector<uhoi::PredictedInteraction> preds;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t g = 0; g < n; ++g) {
    const auto h = random_box(rng), o = random_box(rng);
    gt.push_back({h, o, "bike", rng.below(vocab.size()), std::nullopt});
    for (int p = 0; p < 3; ++p) {
      preds.push_back(uhoi::PredictedInteraction::make(h, o, "bike", verbs[rng.below(verbs.size())],
                                                       static_cast<double>(rng.below(100)) / 100));
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(uhoi::semantic_map(preds, gt, vocab, sim, {}).map_avg);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(preds.size()));
}
BENCHMARK(BM_SemanticMap)->Arg(5)->Arg(50)->Arg(200);

void BM_RuleBasedExtraction(benchmark::State& state) {
  const std::string text =
      "The man is riding the bicycle and holding a cup. A woman holds an umbrella and pets a dog. "
      "There is a child kicking the ball, and he looks at the ball.";
  for (auto _ : state) {
    benchmark::DoNotOptimize(uhoi::refine(uhoi::extract_rule_based(text), "ball", {}));
  }
}
BENCHMARK(BM_RuleBasedExtraction);

void BM_TopK(benchmark::State& state) {
  const std::vector<std::string> verbs = {"ride", "hold", "feed", "walk", "kick", "pet", "hug"};
  uhoi::Xoshiro256 rng(3);
  std::vector<std::vector<uhoi::RawTriplet>> samples(64);
  for (auto& s : samples) {
    for (int i = 0; i < 3; ++i) {
      uhoi::RawTriplet t;
      uhoi::make_triplet("person", verbs[rng.below(verbs.size())], "bike",
                         uhoi::TripletSource::kRuleBased, 0, t);
      s.push_back(t);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(uhoi::select_topk(uhoi::pool(samples), 10));
}
BENCHMARK(BM_TopK);

}  // namespace
BENCHMARK_MAIN();
