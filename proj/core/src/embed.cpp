#include "intercom/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "intercom/error.hpp"
#include "intercom/random.hpp"
#include "intercom/text.hpp"

namespace intercom {

namespace {

int sorted_index(const std::vector<std::string>& ids, std::string_view id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return static_cast<int>(it - ids.begin());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void init_uniform(EmbeddingMatrix& m, Rng& rng) {
  const double half = 0.5 / static_cast<double>(m.dim());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double& v : m.row(i)) v = rng.uniform(-half, half);
  }
}

// One gradient step on the tuple (u, c, negatives).
double sgd_step(std::span<double> u, std::span<double> c, std::vector<std::span<double>>& negs,
                double lr) {
  std::vector<std::span<const double>> views(negs.begin(), negs.end());
  const EdgeGradient g = edge_gradient(u, c, views);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] -= lr * g.user[i];
    c[i] -= lr * g.community[i];
  }
  for (std::size_t k = 0; k < negs.size(); ++k) {
    for (std::size_t i = 0; i < u.size(); ++i) negs[k][i] -= lr * g.negatives[k][i];
  }
  return g.loss;
}

}  // namespace

int BipartiteMultigraph::user_index(std::string_view id) const { return sorted_index(users, id); }
int BipartiteMultigraph::community_index(std::string_view id) const {
  return sorted_index(communities, id);
}

BipartiteMultigraph BipartiteMultigraph::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  BipartiteMultigraph g;
  std::set<std::string> users;
  std::set<std::string> comms;
  for (const auto& [u, c] : pairs) {
    users.insert(u);
    comms.insert(c);
  }
  g.users.assign(users.begin(), users.end());
  g.communities.assign(comms.begin(), comms.end());
  g.user_degree.assign(g.users.size(), 0);
  g.community_degree.assign(g.communities.size(), 0);
  g.edges.reserve(pairs.size());
  for (const auto& [u, c] : pairs) {
    const int ui = g.user_index(u);
    const int ci = g.community_index(c);
    g.edges.emplace_back(ui, ci);
    ++g.user_degree[ui];
    ++g.community_degree[ci];
  }
  return g;
}

BipartiteMultigraph build_bipartite(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(corpus.posts().size());
  for (const Event& p : corpus.posts()) pairs.emplace_back(p.author, p.community);
  return BipartiteMultigraph::from_pairs(pairs);
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim)
    : ids_(std::move(ids)), dim_(dim), data_(ids_.size() * dim, 0.0) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], static_cast<int>(i)).second) {
      throw DataError("embedding matrix: duplicate id " + ids_[i]);
    }
  }
}

int EmbeddingMatrix::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? -1 : it->second;
}

std::span<const double> EmbeddingMatrix::at(std::string_view id) const {
  const int i = index_of(id);
  if (i < 0) throw std::out_of_range("embedding: unknown id " + std::string(id));
  return row(static_cast<std::size_t>(i));
}

std::vector<double> EmbeddingMatrix::mean() const {
  std::vector<double> m(dim_, 0.0);
  if (ids_.empty()) return m;
  for (std::size_t i = 0; i < size(); ++i) {
    auto r = row(i);
    for (std::size_t d = 0; d < dim_; ++d) m[d] += r[d];
  }
  for (double& v : m) v /= static_cast<double>(size());
  return m;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double edge_loss(std::span<const double> user, std::span<const double> community,
                 std::span<const std::span<const double>> negatives) {
  double loss = -log_sigmoid(dot(user, community));
  for (const auto& n : negatives) loss -= log_sigmoid(-dot(user, n));
  return loss;
}

EdgeGradient edge_gradient(std::span<const double> user, std::span<const double> community,
                           std::span<const std::span<const double>> negatives) {
  const std::size_t d = user.size();
  EdgeGradient g;
  g.user.assign(d, 0.0);
  g.community.assign(d, 0.0);
  const double pos = dot(user, community);
  g.loss = -log_sigmoid(pos);
  // d/dx [-log s(x)] = -(1 - s(x)).
  const double gp = -(1.0 - sigmoid(pos));
  for (std::size_t i = 0; i < d; ++i) {
    g.user[i] += gp * community[i];
    g.community[i] = gp * user[i];
  }
  for (const auto& n : negatives) {
    const double x = dot(user, n);
    g.loss -= log_sigmoid(-x);
    // d/dx [-log s(-x)] = s(x).
    const double gn = sigmoid(x);
    std::vector<double> gneg(d);
    for (std::size_t i = 0; i < d; ++i) {
      g.user[i] += gn * n[i];
      gneg[i] = gn * user[i];
    }
    g.negatives.push_back(std::move(gneg));
  }
  return g;
}

EmbeddingTable train_embeddings(const BipartiteMultigraph& graph, const EmbedOptions& opt) {
  if (graph.edges.empty()) throw DataError("train_embeddings: empty graph");
  if (opt.dim == 0) throw std::invalid_argument("train_embeddings: dim must be positive");
  if (opt.negatives < 0 || opt.epochs < 0) throw std::invalid_argument("train_embeddings: bad options");

  EmbeddingTable table{EmbeddingMatrix(graph.users, opt.dim),
                       EmbeddingMatrix(graph.communities, opt.dim)};
  Rng init_rng(derive_seed(opt.seed, "embed/init"));
  init_uniform(table.users, init_rng);
  init_uniform(table.communities, init_rng);

  const std::size_t n_edges = graph.edges.size();
  const double total_steps = static_cast<double>(opt.epochs) * static_cast<double>(n_edges);
  const std::size_t n_comm = graph.communities.size();

  auto run_range = [&](std::span<const std::size_t> order, std::size_t step0, Rng& rng) {
    double loss = 0.0;
    std::vector<std::span<double>> negs(static_cast<std::size_t>(opt.negatives));
    for (std::size_t s = 0; s < order.size(); ++s) {
      const auto [ui, ci] = graph.edges[order[s]];
      for (auto& n : negs) n = table.communities.row(rng.index(n_comm));
      const double progress = static_cast<double>(step0 + s) / total_steps;
      const double lr = opt.lr_start - (opt.lr_start - opt.lr_end) * progress;
      loss += sgd_step(table.users.row(ui), table.communities.row(ci), negs, lr);
    }
    return loss;
  };

  Rng order_rng(derive_seed(opt.seed, "embed/order"));
  Rng neg_rng(derive_seed(opt.seed, "embed/negatives"));
  std::vector<std::size_t> order(n_edges);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = 0; i < n_edges; ++i) order[i] = i;
    order_rng.shuffle(order);
    const std::size_t step0 = static_cast<std::size_t>(epoch) * n_edges;
    double loss = 0.0;
    if (opt.threads <= 1) {
      loss = run_range(order, step0, neg_rng);
    } else {
      const auto t = static_cast<std::size_t>(opt.threads);
      std::vector<double> partial(t, 0.0);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
          const std::size_t lo = n_edges * w / t;
          const std::size_t hi = n_edges * (w + 1) / t;
          Rng rng(derive_seed(opt.seed, (static_cast<std::uint64_t>(epoch) << 16) + w));
          partial[w] = run_range(std::span<const std::size_t>(order).subspan(lo, hi - lo), step0 + lo, rng);
        });
      }
      for (auto& th : pool) th.join();
      for (double p : partial) loss += p;
    }
    if (!std::isfinite(loss)) {
      throw Error("train_embeddings: non-finite loss at epoch " + std::to_string(epoch) +
                  " (lr_start=" + format_double(opt.lr_start) + ")");
    }
    if (opt.on_epoch) opt.on_epoch(epoch, table);
  }
  return table;
}

double embedding_loss(const BipartiteMultigraph& graph, std::span<const std::size_t> edges,
                      const EmbeddingTable& table, int negatives, std::uint64_t seed) {
  if (edges.empty()) return 0.0;
  Rng rng(seed);
  const std::size_t n_comm = table.communities.size();
  double total = 0.0;
  std::vector<std::span<const double>> negs(static_cast<std::size_t>(negatives));
  for (std::size_t e : edges) {
    const auto [ui, ci] = graph.edges[e];
    for (auto& n : negs) n = table.communities.row(rng.index(n_comm));
    total += edge_loss(table.users.row(ui), table.communities.row(ci), negs);
  }
  return total / static_cast<double>(edges.size());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<std::pair<std::string, double>> nearest_communities(const EmbeddingTable& table,
                                                                std::string_view community,
                                                                std::size_t k) {
  const auto query = table.communities.at(community);
  std::vector<std::pair<std::string, double>> all;
  for (std::size_t i = 0; i < table.communities.size(); ++i) {
    const auto& id = table.communities.ids()[i];
    if (id == community) continue;
    all.emplace_back(id, cosine(query, table.communities.row(i)));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

EmbeddingMatrix train_word_vectors(const Corpus& corpus, const EmbedOptions& options, int window) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const Event& p : corpus.posts()) {
    const auto tokens = tokenize_words(p.body);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::size_t lo = i >= static_cast<std::size_t>(window) ? i - window : 0;
      const std::size_t hi = std::min(tokens.size(), i + window + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        if (j != i) pairs.emplace_back(tokens[i], tokens[j]);
      }
    }
  }
  if (pairs.empty()) return EmbeddingMatrix({}, options.dim);
  return train_embeddings(BipartiteMultigraph::from_pairs(pairs), options).users;
}

namespace {

void write_rows(std::ostream& out, const EmbeddingMatrix& m, std::string_view prefix) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << prefix << m.ids()[i] << ' ' << m.dim();
    for (double v : m.row(i)) out << ' ' << format_double(v);
    out << '\n';
  }
}

struct RawRows {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;
  std::size_t dim = 0;
};

RawRows read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read embeddings " + path.string());
  RawRows raw;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> declared;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (lineno == 1 && tok.size() == 2) {
      try {
        std::size_t pos = 0;
        std::stoull(tok[0], &pos);
        declared = std::stoull(tok[1]);
        raw.dim = *declared;
        continue;
      } catch (const std::exception&) {
      }
    }
    std::size_t first_value = 1;
    if (raw.dim > 0 && tok.size() == raw.dim + 2) first_value = 2;
    if (raw.dim == 0) raw.dim = tok.size() - 1;
    if (tok.size() - first_value != raw.dim) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(raw.dim) + " values");
    }
    std::vector<double> row;
    row.reserve(raw.dim);
    for (std::size_t i = first_value; i < tok.size(); ++i) {
      try {
        row.push_back(std::stod(tok[i]));
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number");
      }
      if (!std::isfinite(row.back())) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
      }
    }
    raw.ids.push_back(tok[0]);
    raw.values.push_back(std::move(row));
  }
  return raw;
}

EmbeddingMatrix to_matrix(std::vector<std::string> ids, std::vector<std::vector<double>> values,
                          std::size_t dim) {
  EmbeddingMatrix m(std::move(ids), dim);
  for (std::size_t i = 0; i < m.size(); ++i) std::copy(values[i].begin(), values[i].end(), m.row(i).begin());
  return m;
}

constexpr std::string_view kUserPrefix = "user:";
constexpr std::string_view kCommunityPrefix = "community:";

}  // namespace

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                     std::string_view id_prefix) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings " + path.string());
  out << m.size() << ' ' << m.dim() << '\n';
  write_rows(out, m, id_prefix);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  auto raw = read_rows(path);
  return to_matrix(std::move(raw.ids), std::move(raw.values), raw.dim);
}

void save_embedding_table(const EmbeddingTable& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings " + path.string());
  out << t.users.size() + t.communities.size() << ' ' << t.dim() << '\n';
  write_rows(out, t.users, kUserPrefix);
  write_rows(out, t.communities, kCommunityPrefix);
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  auto raw = read_rows(path);
  std::vector<std::string> uid, cid;
  std::vector<std::vector<double>> uv, cv;
  for (std::size_t i = 0; i < raw.ids.size(); ++i) {
    const auto& id = raw.ids[i];
    if (id.rfind(kUserPrefix, 0) == 0) {
      uid.push_back(id.substr(kUserPrefix.size()));
      uv.push_back(std::move(raw.values[i]));
    } else if (id.rfind(kCommunityPrefix, 0) == 0) {
      cid.push_back(id.substr(kCommunityPrefix.size()));
      cv.push_back(std::move(raw.values[i]));
    } else {
      throw DataError(path.string() + ": id without user:/community: prefix: " + id);
    }
  }
  return {to_matrix(std::move(uid), std::move(uv), raw.dim),
          to_matrix(std::move(cid), std::move(cv), raw.dim)};
}

}  // namespace intercom
