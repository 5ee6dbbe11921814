#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "intercom/features.hpp"

namespace intercom {

// Dense binary-classification training set. Labels are 0/1.
struct Dataset {
  std::vector<std::string> schema;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;

  // Throws SchemaMismatch when vectors disagree on feature names.
  static Dataset from_features(const std::vector<FeatureVector>& x, const std::vector<int>& y);
};

struct ForestOptions {
  int trees = 400;
  std::uint64_t seed = 0;
  int max_features = 0;  // 0: floor(sqrt(F)), at least 1
  int min_leaf = 1;
  int max_depth = 0;     // 0: unlimited
  int threads = 0;       // 0: hardware concurrency
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double probability = 0.0;  // P(label = 1) among bootstrap samples reaching the node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
};

// Bagged CART ensemble (Gini splits on axis-aligned thresholds).
class Forest {
 public:
  // Throws DataError for fewer than 2 rows, single-class labels or ragged rows.
  static Forest train(const Dataset& data, const ForestOptions& options = {});

  // Mean of the trees' leaf probabilities for label 1.
  double predict_proba(std::span<const double> x) const;
  // Checks names against the trained schema first.
  double predict_proba(const FeatureVector& x) const;

  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  double oob_accuracy() const { return oob_accuracy_; }
  std::uint64_t seed() const { return seed_; }

  void save(const std::filesystem::path& path) const;
  static Forest load(const std::filesystem::path& path);

  friend bool operator==(const Forest& a, const Forest& b);

 private:
  std::vector<std::string> schema_;
  std::vector<DecisionTree> trees_;
  double oob_accuracy_ = 0.0;
  std::uint64_t seed_ = 0;
};

inline Forest train_forest(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                           const ForestOptions& options = {}) {
  return Forest::train(Dataset::from_features(x, y), options);
}

}  // namespace intercom
