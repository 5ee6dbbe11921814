#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intercom/error.hpp"
#include "intercom/mobilization.hpp"

namespace intercom {

// Bad key, value or range in a configuration; the CLI maps it to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Config {
  // paths
  std::filesystem::path corpus;
  std::filesystem::path lexicons;      // directory of lexicon directories, or one lexicon
  std::filesystem::path labels;        // sentiment training labels (optional)
  std::filesystem::path embeddings;    // user/community table to load instead of training
  std::filesystem::path word_vectors;  // word vectors to load instead of training
  std::filesystem::path models;        // cache directory for trained models
  std::filesystem::path output;        // report bundle directory

  // detector
  double window_hours = 12.0;
  std::optional<double> baseline;  // nullopt: estimate from matched threads
  BaselineStatistic baseline_statistic = BaselineStatistic::Mean;
  double smoothing = 1.0;
  std::vector<std::string> hosts;  // cross-link host allowlist

  // pagerank
  double alpha = 0.25;
  double tol = 1e-10;

  // training
  std::size_t dim = 300;
  int negatives = 5;
  int embed_epochs = 100;
  int hidden = 64;
  double lr = 0.01;
  int epochs = 20;
  std::size_t batch = 32;
  int sentiment_trees = 400;
  int ensemble_trees = 500;
  std::size_t vocab = 10000;
  std::uint64_t seed = 0;
  int threads = 1;

  bool embed = false;
  bool predict = false;
};

// Applies one `key = value` setting. Throws ConfigError for unknown keys and
// unparsable values.
void apply_setting(Config& config, std::string_view key, std::string_view value);

// Reads `key = value` lines; '#' starts a comment, blank lines are ignored.
Config load_config(const std::filesystem::path& path);
Config parse_config(std::string_view text);

// Throws ConfigError when a value is outside its documented range.
void validate(const Config& config);

// Canonical `key = value` listing of every setting, in a fixed order.
std::string to_string(const Config& config);
std::vector<std::string> config_keys();

}  // namespace intercom
