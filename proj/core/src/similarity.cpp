#include "uhoi/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "uhoi/error.hpp"
#include "uhoi/text.hpp"

namespace uhoi {

namespace {

std::string table_key(std::string_view phrase) {
  return join(split_whitespace(to_lower(phrase)), " ");
}

// RAII slot in the in-flight cap; also maintains the peak gauge.
class InFlightSlot {
 public:
  InFlightSlot(std::counting_semaphore<>& sem, std::atomic<std::size_t>& current,
               std::atomic<std::size_t>& peak)
      : sem_(sem), current_(current) {
    sem_.acquire();
    const std::size_t now = ++current_;
    std::size_t seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
  }
  ~InFlightSlot() {
    --current_;
    sem_.release();
  }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<>& sem_;
  std::atomic<std::size_t>& current_;
};

}  // namespace

TsvEmbeddingBackend::TsvEmbeddingBackend(std::unordered_map<std::string, Embedding> table,
                                         std::string origin)
    : origin_(std::move(origin)) {
  for (auto& [phrase, vec] : table) {
    if (vec.empty()) throw ValidationError("empty embedding for '" + phrase + "'");
    if (dimension_ == 0) dimension_ = vec.size();
    if (vec.size() != dimension_) {
      throw ValidationError("embedding for '" + phrase + "' has dimension " +
                            std::to_string(vec.size()) + ", expected " +
                            std::to_string(dimension_));
    }
    table_.emplace(table_key(phrase), std::move(vec));
  }
}

std::shared_ptr<TsvEmbeddingBackend> TsvEmbeddingBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file: " + path);
  std::unordered_map<std::string, Embedding> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": missing TAB separator");
    }
    const std::string phrase = table_key(line.substr(0, tab));
    std::istringstream values(line.substr(tab + 1));
    Embedding vec;
    std::string token;
    while (values >> token) {
      try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
        vec.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
      }
    }
    if (phrase.empty() || vec.empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": empty phrase or vector");
    }
    if (!table.emplace(phrase, std::move(vec)).second) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": duplicate phrase '" +
                       phrase + "'");
    }
  }
  return std::make_shared<TsvEmbeddingBackend>(std::move(table), path);
}

std::vector<Embedding> TsvEmbeddingBackend::embed(const std::vector<std::string>& phrases) {
  std::vector<Embedding> out;
  out.reserve(phrases.size());
  for (const auto& phrase : phrases) {
    auto it = table_.find(table_key(phrase));
    if (it == table_.end()) {
      throw LookupError("phrase '" + phrase + "' not found in embedding table " + origin_);
    }
    out.push_back(it->second);
  }
  return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEndpoint endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {}

std::vector<Embedding> HttpEmbeddingBackend::embed(const std::vector<std::string>& phrases) {
  const nlohmann::json reply =
      post_json(endpoint_, {{"inputs", phrases}}, retry_, "embedding request");
  std::vector<Embedding> out;
  try {
    for (const auto& v : reply.at("vectors")) out.push_back(v.get<Embedding>());
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("embedding reply from " + endpoint_.url + " malformed: " + e.what());
  }
  if (out.size() != phrases.size()) {
    throw TransportError("embedding reply from " + endpoint_.url + " has " +
                         std::to_string(out.size()) + " vectors for " +
                         std::to_string(phrases.size()) + " inputs");
  }
  return out;
}

EmbeddingSimilarity::EmbeddingSimilarity(std::shared_ptr<EmbeddingBackend> backend,
                                         EmbeddingOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.max_in_flight))) {
  if (!backend_) throw ConfigError("embedding similarity needs a backend");
  if (options_.batch_size == 0) options_.batch_size = 1;
}

std::string EmbeddingSimilarity::describe() const {
  return backend_->describe() + " template='" + options_.phrase_template + "'";
}

std::string EmbeddingSimilarity::apply_template(std::string_view phrase) const {
  std::string out = options_.phrase_template;
  const auto pos = out.find("{}");
  if (pos == std::string::npos) return std::string(phrase);
  out.replace(pos, 2, phrase);
  return out;
}

void EmbeddingSimilarity::fetch(const std::vector<std::string>& phrases) {
  std::vector<std::string> inputs;
  inputs.reserve(phrases.size());
  for (const auto& p : phrases) inputs.push_back(apply_template(p));

  std::vector<Embedding> vectors;
  {
    InFlightSlot slot(in_flight_, current_in_flight_, peak_in_flight_);
    ++backend_calls_;
    vectors = backend_->embed(inputs);
  }
  if (vectors.size() != phrases.size()) {
    throw TransportError("embedding backend returned the wrong number of vectors");
  }

  std::vector<std::vector<double>> units;
  units.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    double norm = 0.0;
    for (double x : vectors[i]) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError("embedding for '" + phrases[i] + "' has zero or non-finite norm");
    }
    std::vector<double> unit(vectors[i].size());
    for (std::size_t d = 0; d < unit.size(); ++d) unit[d] = vectors[i][d] / norm;
    units.push_back(std::move(unit));
  }

  std::unique_lock lock(mutex_);
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    cache_.try_emplace(phrases[i], std::move(units[i]));
  }
}

std::vector<double> EmbeddingSimilarity::unit_vector(std::string_view phrase) {
  const std::string key(phrase);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  fetch({key});
  std::shared_lock lock(mutex_);
  return cache_.at(key);
}

void EmbeddingSimilarity::prefetch(std::span<const std::string> phrases) {
  std::vector<std::string> missing;
  {
    std::set<std::string> seen;
    std::shared_lock lock(mutex_);
    for (const auto& p : phrases) {
      if (!cache_.contains(p) && seen.insert(p).second) missing.push_back(p);
    }
  }
  for (std::size_t start = 0; start < missing.size(); start += options_.batch_size) {
    const auto end = std::min(missing.size(), start + options_.batch_size);
    fetch(std::vector<std::string>(missing.begin() + start, missing.begin() + end));
  }
}

double EmbeddingSimilarity::similarity(std::string_view a, std::string_view b) {
  const auto va = unit_vector(a);
  const auto vb = unit_vector(b);
  if (va.size() != vb.size()) {
    throw ValidationError("embedding dimensions differ for '" + std::string(a) + "' and '" +
                          std::string(b) + "'");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] * vb[i];
  return std::clamp(dot, -1.0, 1.0);
}

std::size_t EmbeddingSimilarity::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::vector<VocabMatch> map_to_vocabulary(std::string_view predicted_verb,
                                          const VerbVocabulary& vocabulary, double tau,
                                          Similarity& sim) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ConfigError("similarity threshold must lie in (0, 1], got " + std::to_string(tau));
  }
  std::vector<VocabMatch> matches;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    const double s = sim.similarity(predicted_verb, vocabulary.verb(i));
    if (s >= tau) matches.push_back({i, s});
  }
  return matches;
}

std::string verb_filter_question(std::string_view verb) {
  return "Can a person " + std::string(verb) + " an object? Reply with either yes or no";
}

YesNoAnswer parse_yes_no(std::string_view reply) {
  std::string t = to_lower(trim(reply));
  const auto first = t.find_first_not_of("\"'*`([ ");
  if (first == std::string::npos) return YesNoAnswer::kUndecided;
  t = t.substr(first);
  if (starts_with_word(t, "yes")) return YesNoAnswer::kYes;
  if (starts_with_word(t, "no")) return YesNoAnswer::kNo;
  return YesNoAnswer::kUndecided;
}

VerbFilterResult filter_wordnet_verbs(const std::vector<std::string>& candidates,
                                      YesNoProvider& provider) {
  VerbFilterResult result;
  if (candidates.empty()) {
    spdlog::warn("verb filter called with an empty candidate list");
    return result;
  }
  std::set<std::string> seen;
  for (const auto& raw : candidates) {
    const std::string verb = normalize_verb_phrase(raw);
    if (verb.empty() || !seen.insert(verb).second) continue;
    const std::string reply = provider.ask(verb_filter_question(verb));
    switch (parse_yes_no(reply)) {
      case YesNoAnswer::kYes:
        result.accepted.push_back(verb);
        break;
      case YesNoAnswer::kNo:
        result.rejected.push_back(verb);
        break;
      case YesNoAnswer::kUndecided:
        spdlog::warn("verb filter: undecided reply for '{}': {}", verb, reply);
        result.undecided.push_back(verb);
        break;
    }
  }
  return result;
}

}  // namespace uhoi
