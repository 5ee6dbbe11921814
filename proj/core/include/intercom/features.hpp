#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intercom/lexicon.hpp"

namespace intercom {

// Ordered feature names with values. Models fix the schema at training time.
struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  void add(std::string name, double value);
  // Appends every entry of `other` with `prefix` prepended to its names.
  void append(const FeatureVector& other, std::string_view prefix = {});
  // Throws std::out_of_range for unknown names.
  double at(std::string_view name) const;
  std::size_t size() const { return values.size(); }
};

// Removes source tokens whose lowercase word form appears in `target_text`.
// Survivors keep their original spelling and punctuation, joined by one space.
std::string strip_shared_words(std::string_view source_text, std::string_view target_text);

// Counting statistics used by the text features.
struct TextStats {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t letters = 0;
  std::size_t uppercase = 0;
};

TextStats text_stats(std::string_view text);
std::size_t count_syllables(std::string_view word);
// 206.835 - 1.015 (words/sentence) - 84.6 (syllables/word); 0 for empty text.
double flesch_reading_ease(const TextStats& stats);

// Token count, average word length, readability, punctuation counts,
// uppercase fraction and one `<lexicon>.<category>_rate` per lexicon category.
// Empty text yields all zeros.
FeatureVector extract_text_features(std::string_view text, std::span<const Lexicon> lexicons);

}  // namespace intercom
