#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "intercom/embed.hpp"
#include "intercom/error.hpp"

using namespace intercom;

namespace {

double max_relative_gradient_error(std::uint64_t seed, std::size_t dim, int negatives) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  auto vec = [&] {
    std::vector<double> v(dim);
    for (double& x : v) x = n(rng);
    return v;
  };
  std::vector<double> u = vec(), c = vec();
  std::vector<std::vector<double>> negs;
  for (int k = 0; k < negatives; ++k) negs.push_back(vec());

  auto loss = [&] {
    std::vector<std::span<const double>> ns(negs.begin(), negs.end());
    return edge_loss(u, c, ns);
  };
  std::vector<std::span<const double>> ns(negs.begin(), negs.end());
  const auto g = edge_gradient(u, c, ns);
  EXPECT_NEAR(g.loss, loss(), 1e-12);

  double worst = 0.0;
  auto check = [&](std::vector<double>& v, const std::vector<double>& analytic) {
    const double h = 1e-5;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = loss();
      v[i] = keep - h;
      const double down = loss();
      v[i] = keep;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-3});
      worst = std::max(worst, std::abs(fd - analytic[i]) / scale);
    }
  };
  check(u, g.user);
  check(c, g.community);
  for (int k = 0; k < negatives; ++k) check(negs[k], g.negatives[k]);
  return worst;
}

}  // namespace

TEST(EmbedObjective, LossDefinition) {
  const std::vector<double> u{1, 0}, c{0.5, 0}, n1{-1, 0};
  const std::vector<std::span<const double>> ns{n1};
  EXPECT_NEAR(edge_loss(u, c, ns), -std::log(sigmoid(0.5)) - std::log(sigmoid(1.0)), 1e-14);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_TRUE(std::isfinite(log_sigmoid(800.0)));
}

TEST(EmbedObjective, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_LT(max_relative_gradient_error(seed, 16, 5), 1e-6) << seed;
  }
}

TEST(Bipartite, FromPairsAndCorpus) {
  const auto g = BipartiteMultigraph::from_pairs({{"u2", "c1"}, {"u1", "c1"}, {"u2", "c1"}});
  EXPECT_EQ(g.users, (std::vector<std::string>{"u1", "u2"}));
  EXPECT_EQ(g.edges.size(), 3u);
  EXPECT_EQ(g.user_degree[g.user_index("u2")], 2u);
  EXPECT_EQ(g.community_degree[0], 3u);

  const auto c = Corpus::from_events({fx::post("p1", "a", "X", 0), fx::post("p2", "a", "Y", 1),
                                      fx::comment("c1", "b", "X", 2, "p1")});
  const auto b = build_bipartite(c);
  EXPECT_EQ(b.edges.size(), 2u);
  EXPECT_EQ(b.user_index("b"), -1);
}

TEST(Embeddings, TwoBlockRecovery) {
  const auto g = fx::two_block_graph(60, 6, 12, 3);
  EmbedOptions o;
  o.dim = 16;
  o.epochs = 100;
  o.seed = 4;
  const auto t = train_embeddings(g, o);
  EXPECT_GE(fx::block_separation(t), 0.95);
  const auto near = nearest_communities(t, "b0_c0", 3);
  ASSERT_EQ(near.size(), 3u);
  for (const auto& [id, _] : near) EXPECT_EQ(id.substr(0, 2), "b0");
}

TEST(Embeddings, LossDecreasesAndSeedReproducible) {
  const auto g = fx::two_block_graph(20, 4, 8, 5);
  std::vector<std::size_t> all(g.edges.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  EmbedOptions o;
  o.dim = 8;
  o.epochs = 1;
  o.seed = 6;
  const auto early = train_embeddings(g, o);
  o.epochs = 30;
  const auto late = train_embeddings(g, o);
  EXPECT_LT(embedding_loss(g, all, late, 5, 7), embedding_loss(g, all, early, 5, 7));
  const auto again = train_embeddings(g, o);
  EXPECT_TRUE(late.users == again.users);
  EXPECT_TRUE(late.communities == again.communities);
}

TEST(Embeddings, SaveLoadRoundTrip) {
  const auto g = fx::two_block_graph(5, 2, 3, 1);
  EmbedOptions o;
  o.dim = 4;
  o.epochs = 2;
  const auto t = train_embeddings(g, o);
  const auto dir = fx::temp_dir("embed");
  save_embedding_table(t, dir / "t.txt");
  const auto back = load_embedding_table(dir / "t.txt");
  EXPECT_TRUE(back.users == t.users);
  EXPECT_TRUE(back.communities == t.communities);

  fx::write_text(dir / "plain.txt", "w1 1 2\nw2 3 4\n");
  const auto m = load_embeddings(dir / "plain.txt");
  EXPECT_EQ(m.dim(), 2u);
  EXPECT_EQ(m.at("w2")[1], 4.0);
  EXPECT_EQ(m.mean(), (std::vector<double>{2.0, 3.0}));
  EXPECT_THROW(m.at("nope"), std::out_of_range);
}

TEST(Embeddings, WordVectors) {
  const auto c = Corpus::from_events({fx::post("p1", "a", "X", 0, "red apple red apple"),
                                      fx::post("p2", "b", "Y", 1, "blue sky blue sky")});
  EmbedOptions o;
  o.dim = 4;
  o.epochs = 3;
  const auto w = train_word_vectors(c, o);
  EXPECT_TRUE(w.contains("apple"));
  EXPECT_TRUE(w.contains("sky"));
  EXPECT_EQ(w.dim(), 4u);
}
