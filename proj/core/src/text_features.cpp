#include "intercom/features.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "intercom/text.hpp"

namespace intercom {

namespace {

struct PunctuationMark {
  char mark;
  const char* name;
};

constexpr PunctuationMark kMarks[] = {
    {'!', "exclamation"}, {'?', "question"}, {'.', "period"},  {',', "comma"},
    {';', "semicolon"},   {':', "colon"},    {'"', "quote"},   {'\'', "apostrophe"},
    {'(', "paren"},       {'*', "asterisk"}, {'-', "hyphen"},
};

bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
    default: return false;
  }
}

}  // namespace

void FeatureVector::add(std::string name, double value) {
  names.push_back(std::move(name));
  values.push_back(value);
}

void FeatureVector::append(const FeatureVector& other, std::string_view prefix) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    add(std::string(prefix) + other.names[i], other.values[i]);
  }
}

double FeatureVector::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("feature not found: " + std::string(name));
}

std::string strip_shared_words(std::string_view source_text, std::string_view target_text) {
  std::unordered_set<std::string> target_words;
  for (auto& w : tokenize_words(target_text)) target_words.insert(std::move(w));
  std::string out;
  for (auto chunk : split_whitespace(source_text)) {
    const auto word = normalize_word(chunk);
    if (!word.empty() && target_words.count(word)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(chunk);
  }
  return out;
}

std::size_t count_syllables(std::string_view word) {
  std::size_t groups = 0;
  bool prev_vowel = false;
  std::size_t letters = 0;
  for (char raw : word) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      prev_vowel = false;
      continue;
    }
    ++letters;
    const bool v = is_vowel(c);
    if (v && !prev_vowel) ++groups;
    prev_vowel = v;
  }
  if (letters == 0) return 0;
  // Silent trailing 'e' ("make"), but not "-le" ("table").
  if (groups > 1 && word.size() >= 2 && std::tolower(word.back()) == 'e' &&
      std::tolower(word[word.size() - 2]) != 'l' && !is_vowel(static_cast<char>(std::tolower(word[word.size() - 2])))) {
    --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

TextStats text_stats(std::string_view text) {
  TextStats s;
  const auto words = tokenize_words(text);
  s.words = words.size();
  for (const auto& w : words) s.syllables += count_syllables(w);
  bool in_terminator = false;
  for (unsigned char c : text) {
    const bool term = c == '.' || c == '!' || c == '?';
    if (term && !in_terminator) ++s.sentences;
    in_terminator = term;
    if (std::isalpha(c)) {
      ++s.letters;
      if (std::isupper(c)) ++s.uppercase;
    }
  }
  if (s.words > 0 && s.sentences == 0) s.sentences = 1;
  return s;
}

double flesch_reading_ease(const TextStats& s) {
  if (s.words == 0) return 0.0;
  const double wps = static_cast<double>(s.words) / static_cast<double>(s.sentences);
  const double spw = static_cast<double>(s.syllables) / static_cast<double>(s.words);
  return 206.835 - 1.015 * wps - 84.6 * spw;
}

FeatureVector extract_text_features(std::string_view text, std::span<const Lexicon> lexicons) {
  FeatureVector f;
  const auto words = tokenize_words(text);
  const TextStats stats = text_stats(text);
  const double n = static_cast<double>(words.size());

  std::size_t chars = 0;
  for (const auto& w : words) chars += w.size();

  f.add("token_count", n);
  f.add("avg_word_length", words.empty() ? 0.0 : static_cast<double>(chars) / n);
  f.add("flesch_reading_ease", flesch_reading_ease(stats));
  for (const auto& m : kMarks) {
    f.add(std::string("punct_") + m.name,
          static_cast<double>(std::count(text.begin(), text.end(), m.mark)));
  }
  f.add("uppercase_fraction", stats.letters == 0 ? 0.0
                                                 : static_cast<double>(stats.uppercase) /
                                                       static_cast<double>(stats.letters));
  for (const auto& lex : lexicons) {
    for (const auto& [cat, vocab] : lex.categories) {
      std::size_t hits = 0;
      for (const auto& w : words) hits += vocab.count(w);
      f.add(lex.name + "." + cat + "_rate", words.empty() ? 0.0 : static_cast<double>(hits) / n);
    }
  }
  return f;
}

}  // namespace intercom
