#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/aggregation.hpp"
#include "uhoi/generation.hpp"
#include "uhoi/pairing.hpp"

namespace uhoi {

// ---- pairs.jsonl ----

struct PairRecord {
  HumanObjectPair pair;
  std::string visual_prompt_path;  // empty when prompts were not persisted
};

nlohmann::ordered_json pair_record_to_json(const PairRecord& record);
PairRecord pair_record_from_json(const nlohmann::json& value);
void write_pairs(const std::string& path, const std::vector<PairRecord>& pairs);
std::vector<PairRecord> read_pairs(const std::string& path);

// ---- transcript.jsonl ----

struct TranscriptRecord {
  std::string pair_id;
  PromptKind prompt_kind = PromptKind::kDirect;
  int sample_index = 0;
  std::string text;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

nlohmann::ordered_json transcript_record_to_json(const TranscriptRecord& record);
TranscriptRecord transcript_record_from_json(const nlohmann::json& value);

struct TranscriptContents {
  std::vector<TranscriptRecord> records;
  std::size_t skipped_lines = 0;  // an unterminated, unparsable final line
};

// A missing file reads as empty. A malformed final line without a trailing
// newline is an interrupted write and is skipped with a warning; any other
// malformed line is a ParseError naming the line number.
TranscriptContents read_transcript(const std::string& path);

void write_transcript_line(std::ostream& out, const TranscriptRecord& record);

// Samples 0..n-1 of each pair, in sample order; pairs with a different
// prompt kind, a missing or duplicated sample index are left out.
std::map<std::string, std::vector<std::string>> complete_pairs(
    const std::vector<TranscriptRecord>& records, PromptKind prompt_kind, int num_samples);

// ---- triplets.jsonl / selections.jsonl ----

nlohmann::ordered_json triplet_to_json(const RawTriplet& triplet);

struct PairSelection {
  std::string pair_id;
  AggregationStrategy strategy = AggregationStrategy::kTopK;
  int k = 1;
  std::size_t num_samples = 1;
  std::vector<ScoredTriplet> selected;
};

nlohmann::ordered_json selection_to_json(const PairSelection& selection);
PairSelection selection_from_json(const nlohmann::json& value);
std::vector<PairSelection> read_selections(const std::string& path);

}  // namespace uhoi
