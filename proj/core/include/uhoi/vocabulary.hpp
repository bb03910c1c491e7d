#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uhoi/text.hpp"

namespace uhoi {

// The finite evaluation verb set. Entries are normalized verb phrases; the
// open-ended prediction space is any normalized phrase and is never stored.
class VerbVocabulary {
 public:
  // Throws ValidationError on an empty list or on two entries that collide
  // after normalization.
  VerbVocabulary(const std::vector<std::string>& verbs, std::string source,
                 VerbNormalization normalization = {});

  // Newline-delimited verb phrases; blank lines and '#' comments are skipped.
  static VerbVocabulary load(const std::string& path, std::string source = {},
                             VerbNormalization normalization = {});

  std::size_t size() const { return verbs_.size(); }
  const std::string& verb(std::size_t index) const { return verbs_.at(index); }
  const std::vector<std::string>& verbs() const { return verbs_; }
  const std::string& source() const { return source_; }
  const VerbNormalization& normalization() const { return normalization_; }

  std::optional<std::size_t> index_of(std::string_view phrase) const;

  // Stable content fingerprint, used to check that reports were computed
  // against the same vocabulary.
  std::string fingerprint() const;

 private:
  std::vector<std::string> verbs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string source_;
  VerbNormalization normalization_;
};

// Dense boolean object x verb matrix of interactions observed in a dataset.
// Kept as data only: evaluation never consults it.
class CoOccurrenceMatrix {
 public:
  CoOccurrenceMatrix(std::vector<std::string> objects, std::vector<std::string> verbs);

  // JSON: { "objects": [...], "verbs": [...], "pairs": [[object, verb], ...] }
  static CoOccurrenceMatrix load(const std::string& path);

  void set(std::size_t object_index, std::size_t verb_index, bool value = true);
  bool at(std::size_t object_index, std::size_t verb_index) const;
  bool allows(std::string_view object, std::string_view verb) const;

  std::size_t rows() const { return objects_.size(); }
  std::size_t cols() const { return verbs_.size(); }
  std::size_t nonzero_count() const;

  const std::vector<std::string>& objects() const { return objects_; }
  const std::vector<std::string>& verbs() const { return verbs_; }

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> verbs_;
  std::vector<std::uint8_t> cells_;
};

}  // namespace uhoi
