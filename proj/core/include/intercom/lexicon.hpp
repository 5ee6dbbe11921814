#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace intercom {

// Word-category lexicon. Words are lowercase; every category is non-empty.
struct Lexicon {
  std::string name;
  std::map<std::string, std::set<std::string>, std::less<>> categories;

  bool has_category(std::string_view category) const { return categories.count(category) > 0; }
  bool contains(std::string_view category, const std::string& word) const;
};

// Builds a lexicon from in-memory word lists; validates the invariants.
Lexicon make_lexicon(std::string name,
                     const std::map<std::string, std::set<std::string>>& categories);

// Loads every `<category>.txt` (one word per line, '#' comments allowed) in
// `dir`. The lexicon is named after the directory.
Lexicon load_lexicon(const std::filesystem::path& dir);

}  // namespace intercom
