#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace uhoi {

// Lowercase, trim, collapse runs of whitespace to one space and drop the
// articles "a", "an", "the". Used for detector labels, object mentions and
// verb phrases so free-form text compares against vocabulary entries.
std::string normalize_label(std::string_view text);

struct VerbNormalization {
  // Reduce the head (first) word to a base form with a few suffix rules.
  bool lemmatize = false;
};

std::string normalize_verb_phrase(std::string_view text,
                                  VerbNormalization options = {});

// Suffix-rule lemmatizer for a single English verb form ("riding" -> "ride").
std::string lemmatize_verb(std::string_view word);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_word(std::string_view text, std::string_view word);

}  // namespace uhoi
