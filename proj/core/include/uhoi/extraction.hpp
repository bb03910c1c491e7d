#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uhoi/datamodel.hpp"
#include "uhoi/http.hpp"
#include "uhoi/similarity.hpp"

namespace uhoi {

enum class TripletSource { kT2G, kRuleBased, kStructured };

std::string to_string(TripletSource source);
TripletSource parse_triplet_source(std::string_view name);

struct RawTriplet {
  std::string subject;
  std::string verb;
  std::string object;
  TripletSource source = TripletSource::kRuleBased;
  int sample_index = 0;

  // "subject|verb|object", the identity used for frequency pooling.
  std::string key() const { return subject + "|" + verb + "|" + object; }

  friend bool operator==(const RawTriplet&, const RawTriplet&) = default;
};

// Normalizes the three fields (labels for subject/object, verb phrase for
// the verb). Returns false and leaves `out` untouched if any field ends up
// empty.
bool make_triplet(std::string_view subject, std::string_view verb, std::string_view object,
                  TripletSource source, int sample_index, RawTriplet& out);

// ---- text-to-graph providers -------------------------------------------

struct T2GTriple {
  std::string subject;
  std::string predicate;
  std::string object;
};

class T2GProvider {
 public:
  virtual ~T2GProvider() = default;
  virtual std::vector<T2GTriple> parse(const std::string& text) = 0;
  virtual std::string describe() const = 0;
};

// POST { "text": ... } -> { "triplets": [ { "subject", "predicate", "object" } ] }
class HttpT2GProvider final : public T2GProvider {
 public:
  explicit HttpT2GProvider(HttpEndpoint endpoint, RetryPolicy retry = {});
  std::vector<T2GTriple> parse(const std::string& text) override;
  std::string describe() const override { return "t2g-http:" + endpoint_.url; }

 private:
  HttpEndpoint endpoint_;
  RetryPolicy retry_;
};

// File-backed: { "<text>": [ ["subject", "predicate", "object"], ... ] }.
// Unknown texts raise LookupError carrying the text hash.
class MockT2GProvider final : public T2GProvider {
 public:
  explicit MockT2GProvider(std::map<std::string, std::vector<T2GTriple>> table);
  static MockT2GProvider load(const std::string& path);
  std::vector<T2GTriple> parse(const std::string& text) override;
  std::string describe() const override { return "t2g-mock"; }

 private:
  std::map<std::string, std::vector<T2GTriple>> table_;
};

// Empty text yields no triplets without contacting the provider.
std::vector<RawTriplet> extract_t2g(const std::string& text, T2GProvider& provider,
                                    int sample_index = 0);

// ---- rule-based extractor ----------------------------------------------

std::string_view bundled_word_list(std::string_view name);

// Closed-class word lists driving the rule-based extractor.
class ClosedClassLexicon {
 public:
  static const ClosedClassLexicon& bundled();
  // Reads <dir>/<name>.txt for each list name; missing files keep the bundled list.
  static ClosedClassLexicon load(const std::string& directory);

  bool is_determiner(std::string_view w) const;
  bool is_preposition(std::string_view w) const { return prepositions_.contains(std::string(w)); }
  bool is_pronoun(std::string_view w) const { return pronouns_.contains(std::string(w)); }
  bool is_auxiliary(std::string_view w) const { return auxiliaries_.contains(std::string(w)); }
  bool is_negation(std::string_view w) const;
  bool is_conjunction(std::string_view w) const { return conjunctions_.contains(std::string(w)); }
  bool is_adverb(std::string_view w) const { return adverbs_.contains(std::string(w)); }
  bool is_listed_verb_form(std::string_view w) const { return verb_forms_.contains(std::string(w)); }

  // Not in any closed class and not punctuation.
  bool is_content(std::string_view w) const;

  const std::set<std::string>& auxiliaries() const { return auxiliaries_; }

 private:
  std::set<std::string> determiners_;
  std::set<std::string> prepositions_;
  std::set<std::string> pronouns_;
  std::set<std::string> auxiliaries_;
  std::set<std::string> negations_;
  std::set<std::string> conjunctions_;
  std::set<std::string> adverbs_;
  std::set<std::string> verb_forms_;
};

// Pattern extractor over closed-class words: per sentence, a subject noun
// phrase, a verb (after optional auxiliaries) with trailing particles, and
// an object noun phrase; coordinated objects and verb phrases share the
// subject. Sentences that do not fit are skipped rather than guessed.
std::vector<RawTriplet> extract_rule_based(
    std::string_view text, int sample_index = 0,
    const ClosedClassLexicon& lexicon = ClosedClassLexicon::bundled());

struct StructuredParse {
  std::vector<RawTriplet> triplets;
  std::size_t malformed = 0;    // parenthesized groups that are not triples
  bool no_interaction = false;  // saw "(person, none, obj)"
};

// Lenient scan for "(subject, verb, object)" groups. Never throws.
StructuredParse parse_structured(std::string_view text, std::string_view object_label,
                                 int sample_index = 0);

// ---- refinement ---------------------------------------------------------

enum class ObjectMatchMode { kExact, kSimilarity };

std::set<std::string> default_copular_blacklist();

struct RefinementConfig {
  HumanLexicon subjects = HumanLexicon::subjects();
  std::set<std::string> verb_blacklist = default_copular_blacklist();
  ObjectMatchMode object_match = ObjectMatchMode::kExact;
  double similarity_threshold = 0.9;

  void validate() const;
};

// Keeps a triplet iff its subject is human, its verb is not copular or
// stative, and its object matches the prompt object. Order and duplicates
// are preserved. Similarity mode needs `sim`.
std::vector<RawTriplet> refine(const std::vector<RawTriplet>& triplets,
                               std::string_view prompt_object, const RefinementConfig& config,
                               Similarity* sim = nullptr);

}  // namespace uhoi
