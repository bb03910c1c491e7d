#include "uhoi/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "uhoi/error.hpp"
#include "uhoi/hash.hpp"

namespace uhoi {

VerbVocabulary::VerbVocabulary(const std::vector<std::string>& verbs,
                               std::string source,
                               VerbNormalization normalization)
    : source_(std::move(source)), normalization_(normalization) {
  verbs_.reserve(verbs.size());
  for (const auto& raw : verbs) {
    std::string verb = normalize_verb_phrase(raw, normalization_);
    if (verb.empty()) {
      throw ValidationError("vocabulary entry is empty after normalization: '" + raw + "'");
    }
    auto [it, inserted] = index_.emplace(verb, verbs_.size());
    if (!inserted) {
      throw ValidationError("duplicate vocabulary entry '" + raw + "' collides with '" +
                            verbs_[it->second] + "'");
    }
    verbs_.push_back(std::move(verb));
  }
  if (verbs_.empty()) throw ValidationError("verb vocabulary is empty");
}

VerbVocabulary VerbVocabulary::load(const std::string& path, std::string source,
                                    VerbNormalization normalization) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary file: " + path);
  std::vector<std::string> verbs;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    verbs.push_back(t);
  }
  if (source.empty()) source = path;
  return VerbVocabulary(verbs, std::move(source), normalization);
}

std::optional<std::size_t> VerbVocabulary::index_of(std::string_view phrase) const {
  auto it = index_.find(normalize_verb_phrase(phrase, normalization_));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string VerbVocabulary::fingerprint() const {
  return content_hash(join(verbs_, "\n"));
}

CoOccurrenceMatrix::CoOccurrenceMatrix(std::vector<std::string> objects,
                                       std::vector<std::string> verbs)
    : objects_(std::move(objects)),
      verbs_(std::move(verbs)),
      cells_(objects_.size() * verbs_.size(), 0) {}

CoOccurrenceMatrix CoOccurrenceMatrix::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open co-occurrence file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    std::vector<std::string> objects;
    std::vector<std::string> verbs;
    for (const auto& o : doc.at("objects")) objects.push_back(normalize_label(o.get<std::string>()));
    for (const auto& v : doc.at("verbs")) verbs.push_back(normalize_verb_phrase(v.get<std::string>()));
    CoOccurrenceMatrix m(objects, verbs);
    for (const auto& pair : doc.at("pairs")) {
      const auto o = normalize_label(pair.at(0).get<std::string>());
      const auto v = normalize_verb_phrase(pair.at(1).get<std::string>());
      const auto oi = std::find(m.objects_.begin(), m.objects_.end(), o);
      const auto vi = std::find(m.verbs_.begin(), m.verbs_.end(), v);
      if (oi == m.objects_.end() || vi == m.verbs_.end()) {
        throw ValidationError(path + ": pair (" + o + ", " + v + ") not in object/verb lists");
      }
      m.set(oi - m.objects_.begin(), vi - m.verbs_.begin());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void CoOccurrenceMatrix::set(std::size_t object_index, std::size_t verb_index, bool value) {
  if (object_index >= rows() || verb_index >= cols()) {
    throw ValidationError("co-occurrence index out of range");
  }
  cells_[object_index * cols() + verb_index] = value ? 1 : 0;
}

bool CoOccurrenceMatrix::at(std::size_t object_index, std::size_t verb_index) const {
  if (object_index >= rows() || verb_index >= cols()) {
    throw ValidationError("co-occurrence index out of range");
  }
  return cells_[object_index * cols() + verb_index] != 0;
}

bool CoOccurrenceMatrix::allows(std::string_view object, std::string_view verb) const {
  const auto oi = std::find(objects_.begin(), objects_.end(), normalize_label(object));
  const auto vi = std::find(verbs_.begin(), verbs_.end(), normalize_verb_phrase(verb));
  if (oi == objects_.end() || vi == verbs_.end()) return false;
  return at(oi - objects_.begin(), vi - verbs_.begin());
}

std::size_t CoOccurrenceMatrix::nonzero_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

}  // namespace uhoi
