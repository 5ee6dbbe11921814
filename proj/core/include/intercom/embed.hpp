#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "intercom/corpus.hpp"

namespace intercom {

// Edge list between two id spaces ("users" on the left, "communities" on the
// right); parallel edges are kept.
struct BipartiteMultigraph {
  std::vector<std::string> users;        // sorted
  std::vector<std::string> communities;  // sorted
  std::vector<std::pair<int, int>> edges;
  std::vector<std::size_t> user_degree;
  std::vector<std::size_t> community_degree;

  int user_index(std::string_view id) const;
  int community_index(std::string_view id) const;

  static BipartiteMultigraph from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);
};

// One (author, community) edge per post, in corpus order.
BipartiteMultigraph build_bipartite(const Corpus& corpus);

// Dense id -> vector map.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  int index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return index_of(id) >= 0; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  // Throws std::out_of_range for unknown ids.
  std::span<const double> at(std::string_view id) const;
  std::vector<double> mean() const;

  const std::vector<double>& data() const { return data_; }
  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct EmbeddingTable {
  EmbeddingMatrix users;
  EmbeddingMatrix communities;

  std::size_t dim() const { return users.dim(); }
};

struct EmbedOptions {
  std::size_t dim = 300;
  int negatives = 5;
  int epochs = 100;
  double lr_start = 0.025;
  double lr_end = 1e-4;
  std::uint64_t seed = 0;
  // >1 enables lock-free parallel SGD; results are then not reproducible.
  int threads = 1;
  std::function<void(int epoch, const EmbeddingTable&)> on_epoch;
};

double log_sigmoid(double x);
double sigmoid(double x);

// Negative-sampling loss of one positive pair and its negatives:
//   -log s(u.c) - sum_k log s(-u.c_k)
double edge_loss(std::span<const double> user, std::span<const double> community,
                 std::span<const std::span<const double>> negatives);

struct EdgeGradient {
  double loss = 0.0;
  std::vector<double> user;
  std::vector<double> community;
  std::vector<std::vector<double>> negatives;
};

EdgeGradient edge_gradient(std::span<const double> user, std::span<const double> community,
                           std::span<const std::span<const double>> negatives);

// SGD over shuffled edges with uniform negative communities and a linearly
// decaying learning rate. Throws Error if the loss turns non-finite.
EmbeddingTable train_embeddings(const BipartiteMultigraph& graph, const EmbedOptions& options = {});

// Mean per-edge loss over `edges` (indices into graph.edges) with seeded
// negatives drawn uniformly from the communities.
double embedding_loss(const BipartiteMultigraph& graph, std::span<const std::size_t> edges,
                      const EmbeddingTable& table, int negatives, std::uint64_t seed);

double cosine(std::span<const double> a, std::span<const double> b);

// Top-k communities by cosine similarity, self excluded; ties by id.
// Throws std::out_of_range for an unknown community.
std::vector<std::pair<std::string, double>> nearest_communities(const EmbeddingTable& table,
                                                                std::string_view community,
                                                                std::size_t k);

// Skip-gram style word vectors from post text: (word, context word) pairs
// within `window` tokens are trained with the same objective.
EmbeddingMatrix train_word_vectors(const Corpus& corpus, const EmbedOptions& options, int window = 2);

// Text format: header `<count> <dim>`, then one `<id> <dim> v1 ... vd` line
// per entity. The loader also accepts header-less `<id> v1 ... vd` lines.
void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                     std::string_view id_prefix = {});
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

// Users and communities in one file with `user:` / `community:` id prefixes.
void save_embedding_table(const EmbeddingTable& t, const std::filesystem::path& path);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

}  // namespace intercom
