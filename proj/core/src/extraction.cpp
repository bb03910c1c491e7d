#include "uhoi/extraction.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "uhoi/error.hpp"
#include "uhoi/hash.hpp"
#include "uhoi/text.hpp"

namespace uhoi {

namespace {

constexpr std::size_t kMaxNounPhraseWords = 4;
constexpr std::size_t kMaxVerbWords = 4;

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = to_lower(trim(line));
    if (!w.empty() && w.front() != '#') words.insert(w);
  }
  return words;
}

// ---- tokenizer ----

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
}

bool is_sentence_end(std::string_view text, std::size_t i) {
  const char c = text[i];
  if (c == '.') {
    // keep decimals like "3.5" inside one token stream
    const bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
    const bool digit_after =
        i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
    return !(digit_before && digit_after);
  }
  return c == '!' || c == '?' || c == ';' || c == ':' || c == '\n';
}

void push_word(std::string word, const ClosedClassLexicon& lex,
               std::vector<std::string>& tokens) {
  while (!word.empty() && (word.front() == '\'' || word.front() == '-')) word.erase(0, 1);
  while (!word.empty() && word.back() == '-') word.pop_back();
  if (word.empty()) return;
  if (ends_with(word, "n't") && word.size() > 3) {
    std::string base = word.substr(0, word.size() - 3);
    tokens.push_back(base == "ca" ? "can" : base == "wo" ? "will" : base);
    tokens.push_back("n't");
    return;
  }
  for (std::string_view clitic : {"'s", "'re", "'m"}) {
    if (ends_with(word, clitic) && word.size() > clitic.size()) {
      const std::string base = word.substr(0, word.size() - clitic.size());
      if (lex.is_pronoun(base)) {
        tokens.push_back(base);
        tokens.push_back(clitic == "'m" ? "am" : std::string(clitic));
        return;
      }
    }
  }
  while (!word.empty() && word.back() == '\'') word.pop_back();
  if (!word.empty()) tokens.push_back(std::move(word));
}

std::vector<std::vector<std::string>> tokenize(std::string_view raw,
                                               const ClosedClassLexicon& lex) {
  std::string text = to_lower(raw);
  std::vector<std::vector<std::string>> sentences(1);
  std::string word;
  auto flush = [&] {
    push_word(std::move(word), lex, sentences.back());
    word.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !is_sentence_end(text, i)) {
      word.push_back(c);
    } else if (is_sentence_end(text, i)) {
      flush();
      if (!sentences.back().empty()) sentences.emplace_back();
    } else if (c == ',') {
      flush();
      sentences.back().push_back(",");
    } else if (is_word_char(c)) {
      word.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  if (sentences.back().empty()) sentences.pop_back();
  return sentences;
}

// ---- clause parser ----

class ClauseParser {
 public:
  ClauseParser(const std::vector<std::string>& tokens, const ClosedClassLexicon& lex,
               int sample_index, std::vector<RawTriplet>& out)
      : t_(tokens), lex_(lex), n_(tokens.size()), sample_index_(sample_index), out_(out) {}

  void run() {
    std::size_t i = 0;
    std::optional<std::string> subject;
    bool coordinated = false;
    while (i < n_) {
      if (auto c = clause(i)) {
        emit(c->subject, c->predicate);
        subject = c->subject;
        i = c->predicate.end;
      } else if (coordinated && subject) {
        if (auto p = predicate(i)) {
          emit(*subject, *p);
          i = p->end;
        } else {
          subject.reset();
          i = next_boundary(i);
        }
      } else {
        subject.reset();
        i = next_boundary(i);
      }
      coordinated = false;
      while (i < n_ && is_coordinator(t_[i])) {
        coordinated = true;
        ++i;
      }
    }
  }

 private:
  struct Predicate {
    std::vector<std::pair<std::string, std::string>> verb_objects;
    std::size_t end = 0;
  };
  struct Clause {
    std::string subject;
    Predicate predicate;
  };

  bool is_coordinator(const std::string& w) const {
    return w == "," || lex_.is_conjunction(w);
  }

  bool adverb_like(const std::string& w) const {
    return lex_.is_adverb(w) || (w.size() > 4 && ends_with(w, "ly") && lex_.is_content(w));
  }

  bool verb_like(const std::string& w) const {
    if (lex_.is_listed_verb_form(w)) return true;
    if (w.size() >= 5 && ends_with(w, "ing")) return true;
    if (w.size() >= 4 && ends_with(w, "ed")) return true;
    return w.size() >= 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
           !ends_with(w, "is");
  }

  std::size_t next_boundary(std::size_t i) const {
    ++i;
    while (i < n_ && !is_coordinator(t_[i])) ++i;
    return i;
  }

  std::string span(std::size_t from, std::size_t to) const {
    std::vector<std::string> words;
    for (std::size_t k = from; k < to; ++k) {
      if (!adverb_like(t_[k])) words.push_back(t_[k]);
    }
    return join(words, " ");
  }

  std::optional<std::pair<std::string, std::size_t>> noun_phrase(std::size_t i) const {
    while (i < n_ && lex_.is_determiner(t_[i])) ++i;
    std::size_t j = i;
    while (j < n_ && lex_.is_content(t_[j])) ++j;
    if (j == i || j - i > kMaxNounPhraseWords) return std::nullopt;
    return std::make_pair(span(i, j), j);
  }

  // Auxiliaries/adverbs, then a verb (or, after an auxiliary, a
  // prepositional predicate such as "next to"), particles, and an object.
  std::optional<Predicate> predicate(std::size_t i) const {
    bool after_aux = false;
    while (i < n_) {
      if (lex_.is_auxiliary(t_[i])) {
        after_aux = true;
        ++i;
      } else if (lex_.is_negation(t_[i])) {
        return std::nullopt;
      } else if (adverb_like(t_[i])) {
        ++i;
      } else {
        break;
      }
    }
    if (i >= n_) return std::nullopt;

    std::vector<std::string> verb;
    if (lex_.is_content(t_[i])) {
      if (!after_aux && !verb_like(t_[i])) return std::nullopt;
      verb.push_back(t_[i++]);
    } else if (!(after_aux && lex_.is_preposition(t_[i]))) {
      return std::nullopt;
    }
    while (i < n_ && lex_.is_preposition(t_[i]) && verb.size() < kMaxVerbWords) {
      verb.push_back(t_[i++]);
    }
    if (verb.empty()) return std::nullopt;

    auto object = noun_phrase(i);
    if (!object) return std::nullopt;
    Predicate p;
    const std::string verb_phrase = join(verb, " ");
    p.verb_objects.emplace_back(verb_phrase, object->first);
    i = object->second;

    // Coordinated objects: "holds a cup and a plate".
    for (;;) {
      std::size_t k = i;
      bool saw = false;
      while (k < n_ && (t_[k] == "," || t_[k] == "and" || t_[k] == "or")) {
        saw = true;
        ++k;
      }
      if (!saw || k >= n_ || !lex_.is_determiner(t_[k])) break;
      if (clause(k)) break;  // "... and the woman holds ..." starts a new clause
      auto more = noun_phrase(k);
      if (!more) break;
      p.verb_objects.emplace_back(verb_phrase, more->first);
      i = more->second;
    }
    p.end = i;
    return p;
  }

  std::optional<Clause> clause(std::size_t i) const {
    if (i + 1 < n_ && t_[i] == "there" && lex_.is_auxiliary(t_[i + 1])) i += 2;
    if (i >= n_) return std::nullopt;

    if (lex_.is_pronoun(t_[i])) {
      if (t_[i] == "there") return std::nullopt;
      auto p = predicate(i + 1);
      if (!p) return std::nullopt;
      return Clause{t_[i], std::move(*p)};
    }

    std::size_t j = i;
    while (j < n_ && lex_.is_determiner(t_[j])) ++j;
    const std::size_t start = j;
    while (j < n_ && lex_.is_content(t_[j])) ++j;
    if (j == start) return std::nullopt;

    // Subject followed by an auxiliary or adverb: "the man is riding ...".
    if (j < n_ && (lex_.is_auxiliary(t_[j]) || lex_.is_adverb(t_[j]))) {
      if (j - start > kMaxNounPhraseWords) return std::nullopt;
      auto p = predicate(j);
      if (!p) return std::nullopt;
      return Clause{span(start, j), std::move(*p)};
    }

    // No auxiliary: the first verb-shaped word after the head starts the
    // predicate ("a woman holds an umbrella").
    for (std::size_t k = start + 1; k < j; ++k) {
      if (adverb_like(t_[k]) || !verb_like(t_[k])) continue;
      if (k - start > kMaxNounPhraseWords) return std::nullopt;
      auto p = predicate(k);
      if (!p) return std::nullopt;
      std::string subject = span(start, k);
      if (subject.empty()) return std::nullopt;
      return Clause{std::move(subject), std::move(*p)};
    }
    return std::nullopt;
  }

  void emit(const std::string& subject, const Predicate& p) {
    for (const auto& [verb, object] : p.verb_objects) {
      RawTriplet triplet;
      if (make_triplet(subject, verb, object, TripletSource::kRuleBased, sample_index_, triplet)) {
        out_.push_back(std::move(triplet));
      }
    }
  }

  const std::vector<std::string>& t_;
  const ClosedClassLexicon& lex_;
  std::size_t n_;
  int sample_index_;
  std::vector<RawTriplet>& out_;
};

std::vector<T2GTriple> triples_from_json(const nlohmann::json& list) {
  std::vector<T2GTriple> out;
  for (const auto& item : list) {
    if (item.is_array()) {
      out.push_back({item.at(0).get<std::string>(), item.at(1).get<std::string>(),
                     item.at(2).get<std::string>()});
    } else {
      out.push_back({item.at("subject").get<std::string>(),
                     item.at("predicate").get<std::string>(),
                     item.at("object").get<std::string>()});
    }
  }
  return out;
}

}  // namespace

std::string to_string(TripletSource source) {
  switch (source) {
    case TripletSource::kT2G: return "t2g";
    case TripletSource::kRuleBased: return "rule_based";
    case TripletSource::kStructured: return "structured";
  }
  return "rule_based";
}

TripletSource parse_triplet_source(std::string_view name) {
  if (name == "t2g") return TripletSource::kT2G;
  if (name == "rule_based" || name == "rule" || name == "rule-based") {
    return TripletSource::kRuleBased;
  }
  if (name == "structured") return TripletSource::kStructured;
  throw ConfigError("unknown extractor '" + std::string(name) + "' (t2g|rule_based|structured)");
}

bool make_triplet(std::string_view subject, std::string_view verb, std::string_view object,
                  TripletSource source, int sample_index, RawTriplet& out) {
  RawTriplet t{normalize_label(subject), normalize_verb_phrase(verb), normalize_label(object),
               source, sample_index};
  if (t.subject.empty() || t.verb.empty() || t.object.empty()) return false;
  out = std::move(t);
  return true;
}

// ---- T2G ----

HttpT2GProvider::HttpT2GProvider(HttpEndpoint endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {
  split_url(endpoint_.url);
}

std::vector<T2GTriple> HttpT2GProvider::parse(const std::string& text) {
  const auto reply = post_json(endpoint_, {{"text", text}}, retry_,
                               "text-to-graph request for text " + content_hash(text));
  try {
    return triples_from_json(reply.at("triplets"));
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("text-to-graph reply for text " + content_hash(text) +
                         " malformed: " + e.what());
  }
}

MockT2GProvider::MockT2GProvider(std::map<std::string, std::vector<T2GTriple>> table)
    : table_(std::move(table)) {}

MockT2GProvider MockT2GProvider::load(const std::string& path) {
  const auto doc = read_json_file(path);
  std::map<std::string, std::vector<T2GTriple>> table;
  try {
    for (const auto& [text, list] : doc.items()) table.emplace(text, triples_from_json(list));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return MockT2GProvider(std::move(table));
}

std::vector<T2GTriple> MockT2GProvider::parse(const std::string& text) {
  auto it = table_.find(text);
  if (it == table_.end()) it = table_.find(trim(text));
  if (it == table_.end()) {
    throw LookupError("text-to-graph mock has no entry for text " + content_hash(text));
  }
  return it->second;
}

std::vector<RawTriplet> extract_t2g(const std::string& text, T2GProvider& provider,
                                    int sample_index) {
  if (trim(text).empty()) return {};
  std::vector<T2GTriple> triples;
  try {
    triples = provider.parse(text);
  } catch (const TransportError& e) {
    throw TransportError(std::string(e.what()) + " [text " + content_hash(text) + "]");
  }
  std::vector<RawTriplet> out;
  for (const auto& tr : triples) {
    RawTriplet t;
    if (make_triplet(tr.subject, tr.predicate, tr.object, TripletSource::kT2G, sample_index, t)) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

// ---- closed-class lexicon ----

const ClosedClassLexicon& ClosedClassLexicon::bundled() {
  static const ClosedClassLexicon lexicon = [] {
    ClosedClassLexicon lex;
    lex.determiners_ = parse_word_list(bundled_word_list("determiners"));
    lex.prepositions_ = parse_word_list(bundled_word_list("prepositions"));
    lex.pronouns_ = parse_word_list(bundled_word_list("pronouns"));
    lex.auxiliaries_ = parse_word_list(bundled_word_list("auxiliaries"));
    lex.negations_ = parse_word_list(bundled_word_list("negations"));
    lex.conjunctions_ = parse_word_list(bundled_word_list("conjunctions"));
    lex.adverbs_ = parse_word_list(bundled_word_list("adverbs"));
    lex.verb_forms_ = parse_word_list(bundled_word_list("verb_forms"));
    return lex;
  }();
  return lexicon;
}

ClosedClassLexicon ClosedClassLexicon::load(const std::string& directory) {
  ClosedClassLexicon lex = bundled();
  auto read = [&](const char* name, std::set<std::string>& target) {
    std::ifstream in(directory + "/" + name + ".txt");
    if (!in) return;
    std::stringstream ss;
    ss << in.rdbuf();
    target = parse_word_list(ss.str());
  };
  read("determiners", lex.determiners_);
  read("prepositions", lex.prepositions_);
  read("pronouns", lex.pronouns_);
  read("auxiliaries", lex.auxiliaries_);
  read("negations", lex.negations_);
  read("conjunctions", lex.conjunctions_);
  read("adverbs", lex.adverbs_);
  read("verb_forms", lex.verb_forms_);
  return lex;
}

bool ClosedClassLexicon::is_determiner(std::string_view w) const {
  return determiners_.contains(std::string(w)) || (w.size() > 2 && ends_with(w, "'s"));
}

bool ClosedClassLexicon::is_negation(std::string_view w) const {
  return negations_.contains(std::string(w));
}

bool ClosedClassLexicon::is_content(std::string_view w) const {
  if (w.empty() || w == ",") return false;
  return !is_determiner(w) && !is_preposition(w) && !is_pronoun(w) && !is_auxiliary(w) &&
         !is_negation(w) && !is_conjunction(w) && !is_adverb(w);
}

std::vector<RawTriplet> extract_rule_based(std::string_view text, int sample_index,
                                           const ClosedClassLexicon& lexicon) {
  std::vector<RawTriplet> out;
  for (const auto& sentence : tokenize(text, lexicon)) {
    ClauseParser(sentence, lexicon, sample_index, out).run();
  }
  return out;
}

// ---- structured ----

StructuredParse parse_structured(std::string_view text, std::string_view object_label,
                                 int sample_index) {
  StructuredParse result;
  const std::string object = normalize_label(object_label);
  std::size_t pos = 0;
  while ((pos = text.find('(', pos)) != std::string_view::npos) {
    const auto close = text.find(')', pos + 1);
    const auto reopen = text.find('(', pos + 1);
    if (close == std::string_view::npos) {
      ++result.malformed;
      break;
    }
    if (reopen != std::string_view::npos && reopen < close) {
      ++result.malformed;
      pos = reopen;
      continue;
    }
    const std::string inner(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;

    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(inner);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!inner.empty() && inner.back() == ',') fields.emplace_back();
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      ++result.malformed;
      continue;
    }
    if (normalize_verb_phrase(fields[1]) == "none") {
      result.no_interaction = true;
      continue;
    }
    std::string obj = normalize_label(fields[2]);
    if (obj == "obj" && !object.empty()) obj = object;
    RawTriplet t;
    if (make_triplet(fields[0], fields[1], obj, TripletSource::kStructured, sample_index, t)) {
      result.triplets.push_back(std::move(t));
    } else {
      ++result.malformed;
    }
  }
  return result;
}

// ---- refinement ----

std::set<std::string> default_copular_blacklist() {
  return {"is",    "are",  "was", "were",  "be",      "been",  "being",
          "has",   "have", "had", "seems", "appears", "looks", "remains"};
}

void RefinementConfig::validate() const {
  if (verb_blacklist.empty()) throw ConfigError("refinement verb blacklist is empty");
  if (subjects.words().empty()) throw ConfigError("refinement human lexicon is empty");
  if (object_match == ObjectMatchMode::kSimilarity &&
      !(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
    throw ConfigError("object similarity threshold must lie in (0, 1]");
  }
}

std::vector<RawTriplet> refine(const std::vector<RawTriplet>& triplets,
                               std::string_view prompt_object, const RefinementConfig& config,
                               Similarity* sim) {
  config.validate();
  if (config.object_match == ObjectMatchMode::kSimilarity && sim == nullptr) {
    throw ConfigError("similarity object matching requires a similarity provider");
  }
  const std::string target = normalize_label(prompt_object);
  std::vector<RawTriplet> kept;
  for (const auto& t : triplets) {
    if (!config.subjects.contains(t.subject)) continue;
    if (config.verb_blacklist.contains(t.verb)) continue;
    bool object_ok = t.object == target;
    if (!object_ok && config.object_match == ObjectMatchMode::kSimilarity) {
      object_ok = sim->similarity(t.object, target) >= config.similarity_threshold;
    }
    if (object_ok) kept.push_back(t);
  }
  return kept;
}

}  // namespace uhoi
