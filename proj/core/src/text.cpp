#include "uhoi/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace uhoi {

namespace {

constexpr std::array<std::string_view, 3> kArticles = {"a", "an", "the"};

bool is_article(std::string_view word) {
  return std::find(kArticles.begin(), kArticles.end(), word) != kArticles.end();
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Undo consonant doubling ("sitt" -> "sit") or restore a dropped silent e
// on short consonant-vowel-consonant stems ("rid" -> "ride").
std::string repair_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (n == 3 && !is_vowel(stem[0]) && is_vowel(stem[1]) && !is_vowel(stem[2]) &&
      stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y') {
    stem.push_back('e');
  }
  return stem;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n\f\v");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool starts_with_word(std::string_view text, std::string_view word) {
  if (text.size() < word.size() || text.substr(0, word.size()) != word) {
    return false;
  }
  return text.size() == word.size() ||
         !std::isalpha(static_cast<unsigned char>(text[word.size()]));
}

std::string normalize_label(std::string_view text) {
  std::vector<std::string> kept;
  for (auto& word : split_whitespace(to_lower(text))) {
    if (!is_article(word)) kept.push_back(std::move(word));
  }
  return join(kept, " ");
}

std::string lemmatize_verb(std::string_view word_in) {
  std::string word(word_in);
  if (word.size() <= 3) return word;
  if (ends_with(word, "ying") && word.size() > 5) {
    return word.substr(0, word.size() - 3);  // carrying -> carry
  }
  if (ends_with(word, "ing") && word.size() > 5) {
    return repair_stem(word.substr(0, word.size() - 3));
  }
  if (ends_with(word, "ied")) return word.substr(0, word.size() - 3) + "y";
  if (ends_with(word, "ed") && word.size() > 4) {
    return repair_stem(word.substr(0, word.size() - 2));
  }
  if (ends_with(word, "ies")) return word.substr(0, word.size() - 3) + "y";
  if (ends_with(word, "sses") || ends_with(word, "shes") ||
      ends_with(word, "ches") || ends_with(word, "xes") ||
      ends_with(word, "zes")) {
    return word.substr(0, word.size() - 2);
  }
  if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us")) {
    return word.substr(0, word.size() - 1);
  }
  return word;
}

std::string normalize_verb_phrase(std::string_view text,
                                  VerbNormalization options) {
  auto words = split_whitespace(normalize_label(text));
  if (options.lemmatize && !words.empty()) {
    words.front() = lemmatize_verb(words.front());
  }
  return join(words, " ");
}

}  // namespace uhoi
