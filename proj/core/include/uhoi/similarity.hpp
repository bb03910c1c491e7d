#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <semaphore>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uhoi/http.hpp"
#include "uhoi/vocabulary.hpp"

namespace uhoi {

// sim(a, b) over normalized verb phrases, in [-1, 1].
class Similarity {
 public:
  virtual ~Similarity() = default;
  virtual double similarity(std::string_view a, std::string_view b) = 0;
  // Warm any cache for a batch of phrases; a no-op by default.
  virtual void prefetch(std::span<const std::string> /*phrases*/) {}
  virtual std::string describe() const = 0;
};

// 1 when the strings are equal, 0 otherwise. With threshold 1 this turns
// the semantic metrics back into closed-vocabulary exact matching.
class ExactMatchSimilarity final : public Similarity {
 public:
  double similarity(std::string_view a, std::string_view b) override {
    return a == b ? 1.0 : 0.0;
  }
  std::string describe() const override { return "exact-match"; }
};

using Embedding = std::vector<double>;

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  // One vector per phrase, same order. Must be safe to call concurrently.
  virtual std::vector<Embedding> embed(const std::vector<std::string>& phrases) = 0;
  virtual std::string describe() const = 0;
};

// Precomputed vectors: one line per phrase, "phrase<TAB>f1 f2 ... fd"; lines
// starting with "#" are comments.
class TsvEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit TsvEmbeddingBackend(std::unordered_map<std::string, Embedding> table,
                               std::string origin = "inline");
  static std::shared_ptr<TsvEmbeddingBackend> load(const std::string& path);

  // Throws LookupError naming the first phrase missing from the table.
  std::vector<Embedding> embed(const std::vector<std::string>& phrases) override;
  std::string describe() const override { return "tsv:" + origin_; }
  std::size_t dimension() const { return dimension_; }

 private:
  std::unordered_map<std::string, Embedding> table_;
  std::string origin_;
  std::size_t dimension_ = 0;
};

// POST { "inputs": [phrases] } -> { "vectors": [[f32...]] }.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(HttpEndpoint endpoint, RetryPolicy retry = {});
  std::vector<Embedding> embed(const std::vector<std::string>& phrases) override;
  std::string describe() const override { return "http:" + endpoint_.url; }

 private:
  HttpEndpoint endpoint_;
  RetryPolicy retry_;
};

struct EmbeddingOptions {
  // "{}" is replaced by the phrase before embedding, e.g. "a person {} something".
  std::string phrase_template = "{}";
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 64;
};

// Cosine similarity over unit-normalized embeddings with a phrase -> vector
// cache shared by concurrent readers and writers. Backend calls are capped at
// `max_in_flight` at any instant.
class EmbeddingSimilarity final : public Similarity {
 public:
  explicit EmbeddingSimilarity(std::shared_ptr<EmbeddingBackend> backend,
                               EmbeddingOptions options = {});

  double similarity(std::string_view a, std::string_view b) override;
  void prefetch(std::span<const std::string> phrases) override;
  std::string describe() const override;

  std::vector<double> unit_vector(std::string_view phrase);

  std::size_t cache_size() const;
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t peak_in_flight() const { return peak_in_flight_.load(); }

 private:
  std::string apply_template(std::string_view phrase) const;
  void fetch(const std::vector<std::string>& phrases);

  std::shared_ptr<EmbeddingBackend> backend_;
  EmbeddingOptions options_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> cache_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> current_in_flight_{0};
  std::atomic<std::size_t> peak_in_flight_{0};
  std::atomic<std::size_t> backend_calls_{0};
};

struct VocabMatch {
  std::size_t verb_index;
  double similarity;
};

// Every vocabulary verb whose similarity to `predicted_verb` is >= tau, in
// vocabulary order. One free-form verb may expand to zero or more entries.
std::vector<VocabMatch> map_to_vocabulary(std::string_view predicted_verb,
                                          const VerbVocabulary& vocabulary, double tau,
                                          Similarity& sim);

// Answers a single free-text question; used by the verb pre-filter.
class YesNoProvider {
 public:
  virtual ~YesNoProvider() = default;
  virtual std::string ask(const std::string& question) = 0;
};

std::string verb_filter_question(std::string_view verb);

enum class YesNoAnswer { kYes, kNo, kUndecided };
YesNoAnswer parse_yes_no(std::string_view reply);

struct VerbFilterResult {
  std::vector<std::string> accepted;
  std::vector<std::string> rejected;
  std::vector<std::string> undecided;
};

// Asks "Can a person <verb> an object?" per candidate and keeps the verbs
// answered yes. Replies that are neither yes nor no are logged and excluded.
VerbFilterResult filter_wordnet_verbs(const std::vector<std::string>& candidates,
                                      YesNoProvider& provider);

}  // namespace uhoi
