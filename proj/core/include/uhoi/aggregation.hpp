#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "uhoi/extraction.hpp"

namespace uhoi {

// Counts of canonical triplet keys pooled over the N samples of one pair.
struct TripletFrequency {
  std::map<std::string, std::size_t> counts;
  // First occurrence of each key, in sample order.
  std::map<std::string, RawTriplet> representative;
  std::size_t num_samples = 1;

  std::size_t total() const;
  std::size_t distinct() const { return counts.size(); }
};

struct ScoredTriplet {
  RawTriplet triplet;
  std::size_t count = 0;
  double score = 0.0;  // min(1, count / N)
};

// Within-sample duplicates count. N is the number of samples (at least 1).
TripletFrequency pool(const std::vector<std::vector<RawTriplet>>& per_sample);

// The k most frequent keys; ties by lexicographic key. Throws ConfigError
// for k < 1.
std::vector<ScoredTriplet> select_topk(const TripletFrequency& freq, int k);

// k distinct keys drawn without replacement with probability proportional
// to their counts, in draw order. The draw walks keys in lexicographic order
// with integer weights, so the result depends only on the seed and the counts.
std::vector<ScoredTriplet> select_sampling(const TripletFrequency& freq, int k,
                                           std::uint64_t seed);

enum class AggregationStrategy { kTopK, kSampling };

std::string to_string(AggregationStrategy strategy);
AggregationStrategy parse_aggregation(std::string_view name);

}  // namespace uhoi
