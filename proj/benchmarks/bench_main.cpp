#include <benchmark/benchmark.h>

#include <random>

#include "intercom/forest.hpp"
#include "intercom/lstm.hpp"
#include "intercom/replynet.hpp"
#include "intercom/stats.hpp"

using namespace intercom;

namespace {

ReplyGraph ring_graph(int n) {
  ReplyGraph g;
  for (int i = 0; i < n; ++i) {
    g.nodes.push_back("u" + std::to_string(100000 + i));
    g.groups.push_back(i % 2 == 0 ? Group::Attacker : Group::Defender);
  }
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) g.edges.push_back({i, pick(rng), 1 + k});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const ReplyEdge& a, const ReplyEdge& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
  return g;
}

void BM_GroupPageRank(benchmark::State& state) {
  const auto g = ring_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(group_pagerank(g, TeleportSet::Attackers));
}
BENCHMARK(BM_GroupPageRank)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ForestTrain(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Dataset d;
  for (int f = 0; f < 20; ++f) d.schema.push_back("f" + std::to_string(f));
  for (int i = 0; i < state.range(0); ++i) {
    std::vector<double> row(20);
    for (double& x : row) x = n(rng);
    d.labels.push_back(row[0] + row[1] > 0 ? 1 : 0);
    d.rows.push_back(std::move(row));
  }
  ForestOptions o;
  o.trees = 50;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(Forest::train(d, o));
}
BENCHMARK(BM_ForestTrain)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LstmGradient(benchmark::State& state) {
  const auto h = state.range(0);
  const auto p = LstmParams::random(32, h, 3);
  SocialSequence s;
  s.inputs = Eigen::MatrixXd::Random(32, 53);
  s.label = 1;
  for (auto _ : state) benchmark::DoNotOptimize(loss_gradient(s, p));
}
BENCHMARK(BM_LstmGradient)->Arg(16)->Arg(64);

void BM_MannWhitney(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<double> a(state.range(0)), b(state.range(0));
  for (double& x : a) x = n(rng);
  for (double& x : b) x = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(stats::mann_whitney_u(a, b));
}
BENCHMARK(BM_MannWhitney)->Arg(10)->Arg(20)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
