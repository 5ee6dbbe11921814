#include "intercom/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <fstream>
#include <thread>

#include "intercom/binary_io.hpp"
#include "intercom/error.hpp"
#include "intercom/random.hpp"

namespace intercom {

namespace {

constexpr const char* kForestMagic = "ICFOREST";
constexpr std::uint32_t kForestVersion = 1;

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestOptions& opt, int mtry, std::uint64_t seed)
      : data_(data), opt_(opt), mtry_(mtry), rng_(seed) {}

  DecisionTree build(std::vector<std::size_t> sample) {
    DecisionTree tree;
    grow(tree, sample, 0);
    return tree;
  }

 private:
  int grow(DecisionTree& tree, std::vector<std::size_t>& sample, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::size_t positives = 0;
    for (std::size_t i : sample) positives += data_.labels[i] == 1;
    const double n = static_cast<double>(sample.size());
    tree.nodes[id].probability = static_cast<double>(positives) / n;

    const bool pure = positives == 0 || positives == sample.size();
    const bool too_small = sample.size() < 2 * static_cast<std::size_t>(opt_.min_leaf);
    const bool too_deep = opt_.max_depth > 0 && depth >= opt_.max_depth;
    if (pure || too_small || too_deep) return id;

    const SplitCandidate split = best_split(sample, positives);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : sample) {
      (data_.rows[i][split.feature] <= split.threshold ? left : right).push_back(i);
    }
    sample.clear();
    sample.shrink_to_fit();
    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  // Visits features in random order until `mtry` non-constant ones have been
  // evaluated (constant features do not count towards the budget).
  SplitCandidate best_split(const std::vector<std::size_t>& sample, std::size_t positives) {
    const int nf = static_cast<int>(data_.schema.size());
    std::vector<int> order(nf);
    for (int f = 0; f < nf; ++f) order[f] = f;

    SplitCandidate best;
    best.impurity = std::numeric_limits<double>::infinity();
    const double total = static_cast<double>(sample.size());
    const double total_pos = static_cast<double>(positives);
    std::vector<std::pair<double, int>> values(sample.size());

    int evaluated = 0;
    for (int k = 0; k < nf && evaluated < mtry_; ++k) {
      std::swap(order[k], order[k + rng_.index(static_cast<std::size_t>(nf - k))]);
      const int f = order[k];
      for (std::size_t s = 0; s < sample.size(); ++s) {
        values[s] = {data_.rows[sample[s]][f], data_.labels[sample[s]]};
      }
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;
      ++evaluated;

      double left_pos = 0.0;
      const std::size_t min_leaf = static_cast<std::size_t>(opt_.min_leaf);
      for (std::size_t s = 0; s + 1 < values.size(); ++s) {
        left_pos += values[s].second;
        if (values[s].first == values[s + 1].first) continue;
        const std::size_t nl = s + 1;
        const std::size_t nr = values.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double dl = static_cast<double>(nl);
        const double dr = static_cast<double>(nr);
        const double pl = left_pos / dl;
        const double pr = (total_pos - left_pos) / dr;
        // Weighted Gini impurity of the two children.
        const double impurity = (dl * 2.0 * pl * (1.0 - pl) + dr * 2.0 * pr * (1.0 - pr)) / total;
        if (impurity < best.impurity) {
          best.impurity = impurity;
          best.feature = f;
          best.threshold = 0.5 * (values[s].first + values[s + 1].first);
          // Guard against midpoint rounding onto the right value.
          if (best.threshold >= values[s + 1].first) best.threshold = values[s].first;
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestOptions& opt_;
  int mtry_;
  Rng rng_;
};

}  // namespace

Dataset Dataset::from_features(const std::vector<FeatureVector>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) throw DataError("dataset: feature/label count mismatch");
  Dataset d;
  if (x.empty()) return d;
  d.schema = x.front().names;
  d.rows.reserve(x.size());
  for (const auto& fv : x) {
    if (fv.names != d.schema) throw SchemaMismatch("dataset: feature schemas differ between rows");
    d.rows.push_back(fv.values);
  }
  d.labels = y;
  return d;
}

double DecisionTree::predict(std::span<const double> x) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].probability;
}

Forest Forest::train(const Dataset& data, const ForestOptions& opt) {
  const std::size_t n = data.rows.size();
  if (n < 2 || data.labels.size() != n) throw DataError("train_forest: need at least 2 labelled rows");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
  for (int label : data.labels) {
    if (label != 0 && label != 1) throw DataError("train_forest: labels must be 0 or 1");
  }
  if (positives == 0 || positives == n) throw DataError("train_forest: both classes must be present");
  for (const auto& row : data.rows) {
    if (row.size() != data.schema.size()) throw DataError("train_forest: ragged feature rows");
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("train_forest: non-finite feature value");
    }
  }
  if (opt.trees < 1) throw std::invalid_argument("train_forest: trees must be >= 1");
  if (data.schema.empty()) throw DataError("train_forest: empty feature schema");

  const int nf = static_cast<int>(data.schema.size());
  const int mtry = opt.max_features > 0
                       ? std::min(opt.max_features, nf)
                       : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(nf)))));

  Forest forest;
  forest.schema_ = data.schema;
  forest.seed_ = opt.seed;
  forest.trees_.resize(static_cast<std::size_t>(opt.trees));
  std::vector<std::vector<std::size_t>> in_bag_counts(opt.trees);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < opt.trees; t = next++) {
      Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(t)));
      std::vector<std::size_t> sample(n);
      std::vector<std::size_t> counts(n, 0);
      for (auto& s : sample) {
        s = rng.index(n);
        ++counts[s];
      }
      std::sort(sample.begin(), sample.end());
      TreeBuilder builder(data, opt, mtry, rng.next());
      forest.trees_[t] = builder.build(std::move(sample));
      in_bag_counts[t] = std::move(counts);
    }
  };
  unsigned threads = opt.threads > 0 ? static_cast<unsigned>(opt.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(opt.trees));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::size_t scored = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int votes = 0;
    for (int t = 0; t < opt.trees; ++t) {
      if (in_bag_counts[t][i] > 0) continue;
      sum += forest.trees_[t].predict(data.rows[i]);
      ++votes;
    }
    if (votes == 0) continue;
    ++scored;
    correct += ((sum / votes > 0.5) ? 1 : 0) == data.labels[i];
  }
  forest.oob_accuracy_ = scored ? static_cast<double>(correct) / static_cast<double>(scored) : 0.0;
  return forest;
}

double Forest::predict_proba(std::span<const double> x) const {
  if (x.size() != schema_.size()) throw SchemaMismatch("forest: feature count mismatch");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

double Forest::predict_proba(const FeatureVector& x) const {
  if (x.names != schema_) throw SchemaMismatch("forest: feature schema differs from training schema");
  return predict_proba(std::span<const double>(x.values));
}

void Forest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write forest to " + path.string());
  out.write(kForestMagic, 8);
  BinaryWriter w(out);
  w.write<std::uint32_t>(kForestVersion);
  w.write<std::uint64_t>(seed_);
  w.write<double>(oob_accuracy_);
  w.write<std::uint32_t>(static_cast<std::uint32_t>(schema_.size()));
  for (const auto& name : schema_) w.write_string(name);
  w.write<std::uint32_t>(static_cast<std::uint32_t>(trees_.size()));
  for (const auto& tree : trees_) {
    w.write<std::uint32_t>(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      w.write<std::int32_t>(node.feature);
      w.write<double>(node.threshold);
      w.write<std::int32_t>(node.left);
      w.write<std::int32_t>(node.right);
      w.write<double>(node.probability);
    }
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Forest Forest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read forest " + path.string());
  BinaryReader r(in);
  r.expect_magic(kForestMagic);
  const auto version = r.read<std::uint32_t>();
  if (version != kForestVersion) {
    throw DataError("forest " + path.string() + ": unsupported version " + std::to_string(version));
  }
  Forest f;
  f.seed_ = r.read<std::uint64_t>();
  f.oob_accuracy_ = r.read<double>();
  const auto nf = r.read<std::uint32_t>();
  for (std::uint32_t i = 0; i < nf; ++i) f.schema_.push_back(r.read_string());
  const auto nt = r.read<std::uint32_t>();
  f.trees_.resize(nt);
  for (auto& tree : f.trees_) {
    const auto nn = r.read<std::uint32_t>();
    tree.nodes.resize(nn);
    for (auto& node : tree.nodes) {
      node.feature = r.read<std::int32_t>();
      node.threshold = r.read<double>();
      node.left = r.read<std::int32_t>();
      node.right = r.read<std::int32_t>();
      node.probability = r.read<double>();
      const bool leaf = node.feature < 0;
      if (!leaf && (node.feature >= static_cast<int>(nf) || node.left <= 0 || node.right <= 0 ||
                    node.left >= static_cast<int>(nn) || node.right >= static_cast<int>(nn))) {
        throw DataError("forest " + path.string() + ": corrupt node");
      }
    }
    if (tree.nodes.empty()) throw DataError("forest " + path.string() + ": empty tree");
  }
  return f;
}

bool operator==(const Forest& a, const Forest& b) {
  if (a.schema_ != b.schema_ || a.trees_.size() != b.trees_.size() || a.seed_ != b.seed_) return false;
  for (std::size_t t = 0; t < a.trees_.size(); ++t) {
    const auto& x = a.trees_[t].nodes;
    const auto& y = b.trees_[t].nodes;
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].feature != y[i].feature || x[i].threshold != y[i].threshold ||
          x[i].left != y[i].left || x[i].right != y[i].right ||
          x[i].probability != y[i].probability) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace intercom
