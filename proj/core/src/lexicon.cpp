#include "intercom/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include "intercom/error.hpp"
#include "intercom/text.hpp"

namespace intercom {

bool Lexicon::contains(std::string_view category, const std::string& word) const {
  auto it = categories.find(category);
  return it != categories.end() && it->second.count(word) > 0;
}

Lexicon make_lexicon(std::string name,
                     const std::map<std::string, std::set<std::string>>& categories) {
  Lexicon lex;
  lex.name = std::move(name);
  for (const auto& [cat, words] : categories) {
    if (words.empty()) throw DataError("lexicon " + lex.name + ": category `" + cat + "` is empty");
    auto& dst = lex.categories[cat];
    for (const auto& w : words) {
      if (w != to_lower(w)) throw DataError("lexicon " + lex.name + ": word `" + w + "` not lowercase");
      dst.insert(w);
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("lexicon directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::set<std::string>> cats;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw DataError("cannot read lexicon file " + f.string());
    auto& words = cats[f.stem().string()];
    std::string line;
    while (std::getline(in, line)) {
      auto word = to_lower(line);
      word.erase(0, word.find_first_not_of(" \t\r"));
      word.erase(word.find_last_not_of(" \t\r") + 1);
      if (word.empty() || word[0] == '#') continue;
      words.insert(word);
    }
  }
  if (cats.empty()) throw DataError("lexicon directory has no category files: " + dir.string());
  auto name = dir.filename().string();
  if (name.empty()) name = dir.parent_path().filename().string();
  return make_lexicon(name, cats);
}

}  // namespace intercom
