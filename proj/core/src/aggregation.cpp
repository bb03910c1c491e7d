#include "uhoi/aggregation.hpp"

#include <algorithm>

#include "uhoi/error.hpp"
#include "uhoi/rng.hpp"

namespace uhoi {

namespace {

ScoredTriplet scored(const TripletFrequency& freq, const std::string& key) {
  const std::size_t count = freq.counts.at(key);
  const double n = static_cast<double>(std::max<std::size_t>(1, freq.num_samples));
  return {freq.representative.at(key), count,
          std::min(1.0, static_cast<double>(count) / n)};
}

void check_k(int k) {
  if (k < 1) throw ConfigError("k must be >= 1, got " + std::to_string(k));
}

}  // namespace

std::size_t TripletFrequency::total() const {
  std::size_t sum = 0;
  for (const auto& [key, count] : counts) sum += count;
  return sum;
}

TripletFrequency pool(const std::vector<std::vector<RawTriplet>>& per_sample) {
  TripletFrequency freq;
  freq.num_samples = std::max<std::size_t>(1, per_sample.size());
  for (const auto& sample : per_sample) {
    for (const auto& t : sample) {
      const std::string key = t.key();
      ++freq.counts[key];
      freq.representative.try_emplace(key, t);
    }
  }
  return freq;
}

std::vector<ScoredTriplet> select_topk(const TripletFrequency& freq, int k) {
  check_k(k);
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.counts.begin(),
                                                          freq.counts.end());
  // std::map iteration is already in key order; stable_sort keeps it for ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
  std::vector<ScoredTriplet> out;
  out.reserve(ranked.size());
  for (const auto& [key, count] : ranked) out.push_back(scored(freq, key));
  return out;
}

std::vector<ScoredTriplet> select_sampling(const TripletFrequency& freq, int k,
                                           std::uint64_t seed) {
  check_k(k);
  std::vector<std::pair<std::string, std::size_t>> remaining(freq.counts.begin(),
                                                             freq.counts.end());
  std::size_t mass = freq.total();
  Xoshiro256 rng(seed);
  std::vector<ScoredTriplet> out;
  while (!remaining.empty() && out.size() < static_cast<std::size_t>(k)) {
    std::uint64_t r = rng.below(mass);
    auto it = remaining.begin();
    while (r >= it->second) {
      r -= it->second;
      ++it;
    }
    out.push_back(scored(freq, it->first));
    mass -= it->second;
    remaining.erase(it);
  }
  return out;
}

std::string to_string(AggregationStrategy strategy) {
  return strategy == AggregationStrategy::kSampling ? "sampling" : "topk";
}

AggregationStrategy parse_aggregation(std::string_view name) {
  if (name == "topk" || name == "top-k") return AggregationStrategy::kTopK;
  if (name == "sampling") return AggregationStrategy::kSampling;
  throw ConfigError("unknown aggregation '" + std::string(name) + "' (topk|sampling)");
}

}  // namespace uhoi
