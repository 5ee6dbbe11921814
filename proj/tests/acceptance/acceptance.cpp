// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "intercom/auc.hpp"
#include "intercom/embed.hpp"
#include "intercom/features.hpp"
#include "intercom/lstm.hpp"
#include "intercom/mobilization.hpp"
#include "intercom/pipeline.hpp"
#include "intercom/replynet.hpp"
#include "intercom/sentiment.hpp"
#include "intercom/stats.hpp"
#include "intercom/synth.hpp"
#include "oracles.hpp"

using namespace intercom;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failed checks of one criterion.
struct Check {
  std::ostringstream notes;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << "  - " << what << '\n';
    }
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

void detector(Check& c) {
  const auto start = Clock::now();
  SynthSpec spec;
  spec.crosslinks = 240;
  spec.seed = 2024;
  spec.burst_ratio = 3.2;
  spec.quiet_ratio = 0.8;
  spec.matched_ratio = 1.6;
  spec.mobile_per_community = 1000;
  const auto gen = generate_corpus(spec);
  const auto corpus = Corpus::from_events(gen.events);
  const auto links = extract_crosslinks(corpus);
  c.expect(links.links.size() == gen.manifest.links.size(), "every planted cross-link is extracted");
  const auto base = baseline_ratio(corpus, links);
  c.expect(std::abs(base.baseline - 1.6) <= 0.1, "baseline " + num(base.baseline) + " within 1.6 +- 0.1");

  std::size_t strong = 0, caught = 0, weak = 0, false_pos = 0;
  for (std::size_t i = 0; i < links.links.size() && i < gen.manifest.links.size(); ++i) {
    const auto& planted = gen.manifest.links[i];
    const auto rec = detect(corpus, links.links[i], base.baseline);
    if (planted.ratio >= 2 * base.baseline) {
      ++strong;
      caught += rec.is_mobilization();
    }
    if (planted.ratio <= base.baseline / 2) {
      ++weak;
      false_pos += rec.is_mobilization();
    }
  }
  c.expect(strong > 0 && caught == strong, "recall " + std::to_string(caught) + "/" + std::to_string(strong));
  c.expect(weak > 0 && false_pos == 0, "false positives " + std::to_string(false_pos) + "/" + std::to_string(weak));
  c.expect(strong + weak == links.links.size(), "every planted link is in one of the two regimes");
  const double t = seconds_since(start);
  c.expect(t < 60, "runtime " + num(t) + "s < 60s");
}

void pagerank(Check& c) {
  const auto start = Clock::now();
  double worst_mc = 0, worst_sum = 0, worst_std = 0;
  bool symmetric = true;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = oracle::random_graph(2 + (seed * 7) % 19, 1000 + seed, false);
    std::vector<int> attackers;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (g.groups[i] == Group::Attacker) attackers.push_back(static_cast<int>(i));
    }
    const auto apr = group_pagerank(g, TeleportSet::Attackers);
    const auto mc = oracle::pagerank_monte_carlo(g, attackers, 0.25, 1'000'000, 77 + seed);
    double sum = 0;
    for (std::size_t i = 0; i < mc.size(); ++i) {
      worst_mc = std::max(worst_mc, std::abs(apr.scores[i] - mc[i]));
      sum += apr.scores[i];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

    const auto all = group_pagerank(g, TeleportSet::All);
    const auto ref = oracle::standard_pagerank(g, 0.75);
    for (std::size_t i = 0; i < ref.size(); ++i) worst_std = std::max(worst_std, std::abs(all.scores[i] - ref[i]));

    auto swapped = g;
    for (auto& grp : swapped.groups) {
      if (grp == Group::Attacker) grp = Group::Defender;
      else if (grp == Group::Defender) grp = Group::Attacker;
    }
    symmetric = symmetric && group_pagerank(swapped, TeleportSet::Defenders).scores == apr.scores &&
                group_pagerank(swapped, TeleportSet::Attackers).scores ==
                    group_pagerank(g, TeleportSet::Defenders).scores;
  }
  c.expect(worst_mc <= 1e-3, "Monte Carlo max deviation " + num(worst_mc) + " <= 1e-3");
  c.expect(worst_sum <= 1e-9, "score sums within 1e-9 of 1 (worst " + num(worst_sum) + ")");
  c.expect(worst_std <= 1e-10, "teleport=all vs standard PageRank " + num(worst_std) + " <= 1e-10");
  c.expect(symmetric, "attacker/defender relabeling swaps scores exactly");
  const double t = seconds_since(start);
  c.expect(t < 120, "runtime " + num(t) + "s < 120s");
}

void embedding(Check& c) {
  const auto start = Clock::now();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.5);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto vec = [&] {
      std::vector<double> v(16);
      for (double& x : v) x = n(rng);
      return v;
    };
    std::vector<double> u = vec(), com = vec();
    std::vector<std::vector<double>> negs{vec(), vec(), vec(), vec(), vec()};
    auto loss = [&] {
      std::vector<std::span<const double>> ns(negs.begin(), negs.end());
      return edge_loss(u, com, ns);
    };
    std::vector<std::span<const double>> ns(negs.begin(), negs.end());
    const auto g = edge_gradient(u, com, ns);
    auto check = [&](std::vector<double>& v, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + 1e-5;
        const double up = loss();
        v[i] = keep - 1e-5;
        const double down = loss();
        v[i] = keep;
        const double fd = (up - down) / 2e-5;
        worst = std::max(worst, std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-3}));
      }
    };
    check(u, g.user);
    check(com, g.community);
    for (std::size_t k = 0; k < negs.size(); ++k) check(negs[k], g.negatives[k]);
  }
  c.expect(worst < 1e-6, "gradient relative error " + num(worst) + " < 1e-6");

  EmbedOptions o;
  o.dim = 16;
  o.epochs = 100;
  o.seed = 9;
  const auto table = train_embeddings(fx::two_block_graph(60, 6, 12, 8), o);
  const double sep = fx::block_separation(table);
  c.expect(sep >= 0.95, "within-block > cross-block for " + num(sep) + " of pairs (>= 0.95)");
  const double t = seconds_since(start);
  c.expect(t < 300, "runtime " + num(t) + "s < 300s");
}

double split_auc(const PredictionDataset& d, const LstmParams& p) {
  std::vector<int> labels;
  for (auto i : d.split.test) labels.push_back(d.sequences[i].label);
  return auc(score_all(d.sequences, d.split.test, p), labels);
}

void lstm(Check& c) {
  double worst_grad = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = LstmParams::random(4, 3, seed);
    SocialSequence s;
    s.inputs = Eigen::MatrixXd::Random(4, 3 + static_cast<Eigen::Index>(seed % 6));
    s.label = static_cast<int>(seed % 2);
    worst_grad = std::max(worst_grad, gradient_check(p, s));
  }
  c.expect(worst_grad < 1e-4, "gradient check max relative error " + num(worst_grad) + " < 1e-4");

  double worst_ref = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = LstmParams::random(5, 4, 50 + seed);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3 + static_cast<Eigen::Index>(seed));
    const auto trace = lstm_forward(x, p);
    const auto ref = oracle::lstm_reference(p, x);
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      for (Eigen::Index k = 0; k < 4; ++k) worst_ref = std::max(worst_ref, std::abs(trace.h(k, t) - ref.h[t][k]));
    }
    SocialSequence s;
    s.inputs = x;
    worst_ref = std::max(worst_ref, std::abs(predict_prob(s, p) - ref.probability));
  }
  c.expect(worst_ref <= 1e-12, "scalar reference deviation " + num(worst_ref) + " <= 1e-12");

  LstmTrainOptions o;
  o.lr = 0.02;
  o.epochs = 10;
  o.seed = 3;
  const auto planted = fx::planted_sequences(2000, 8, 101);
  const double planted_auc = split_auc(planted, train_lstm(planted, LstmParams::random(8, 8, 102), o).params);
  c.expect(planted_auc >= 0.95, "planted-rule test AUC " + num(planted_auc) + " >= 0.95");

  o.epochs = 3;
  const auto shuffled = fx::planted_sequences(10000, 8, 103, true);
  const double null_auc = split_auc(shuffled, train_lstm(shuffled, LstmParams::random(8, 8, 104), o).params);
  c.expect(std::abs(null_auc - 0.5) <= 0.05, "shuffled-label test AUC " + num(null_auc) + " within 0.5 +- 0.05");
}

void auc_criterion(Check& c) {
  std::mt19937_64 rng(11);
  std::size_t fixtures = 0, mismatches = 0, with_ties = 0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int rep = 0; rep < 500; ++rep) {
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::uniform_int_distribution<int>(0, 4)(rng);
        y[i] = std::uniform_int_distribution<int>(0, 1)(rng);
      }
      const auto pos = std::count(y.begin(), y.end(), 1);
      if (pos == 0 || pos == static_cast<long>(n)) continue;
      ++fixtures;
      std::vector<double> sorted = s;
      std::sort(sorted.begin(), sorted.end());
      with_ties += std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
      mismatches += auc(s, y) != oracle::auc_pairs(s, y);
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(fixtures) + " fixtures disagree");
  c.expect(with_ties > 0, "tie fixtures included");
}

void statistics(Check& c) {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const double mw = stats::mann_whitney_u(a, b).p_value;
  c.expect(std::abs(mw - 0.1) < 1e-12, "Mann-Whitney exact p " + num(mw) + " == 0.1");
  const std::vector<double> d{1, 2, 3, 4, 5};
  const double wx = stats::wilcoxon_signed_rank(d).p_value;
  c.expect(std::abs(wx - 0.0625) < 1e-12, "Wilcoxon exact p " + num(wx) + " == 0.0625");

  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  int mw_hits = 0, wx_hits = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(50), y(50), diff(50);
    for (int i = 0; i < 50; ++i) {
      x[i] = n(rng);
      y[i] = n(rng);
      diff[i] = x[i] - y[i];
    }
    mw_hits += stats::mann_whitney_u(x, y).p_value < 0.05;
    wx_hits += stats::wilcoxon_signed_rank(diff).p_value < 0.05;
  }
  c.expect(std::abs(mw_hits / 1000.0 - 0.05) <= 0.02, "Mann-Whitney null rejection rate " + num(mw_hits / 1000.0));
  c.expect(std::abs(wx_hits / 1000.0 - 0.05) <= 0.02, "Wilcoxon null rejection rate " + num(wx_hits / 1000.0));
}

double sentiment_accuracy(bool separable, const std::vector<Lexicon>& lex) {
  const auto train = fx::sentiment_set(1000, 201, separable);
  const auto test = fx::sentiment_set(4000, 202, separable);
  std::vector<FeatureVector> x;
  for (const auto& l : train.links) x.push_back(sentiment_features(l, train.corpus, lex));
  ForestOptions o;
  o.trees = 100;
  o.seed = 203;
  o.threads = 1;
  const auto forest = train_forest(x, train.labels, o);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < test.links.size(); ++i) {
    ok += (predict_sentiment(forest, test.links[i], test.corpus, lex).label == Sentiment::Negative) ==
          (test.labels[i] == 1);
  }
  return static_cast<double>(ok) / static_cast<double>(test.links.size());
}

void sentiment(Check& c) {
  const std::vector<Lexicon> lex{load_lexicon(INTERCOM_LEXICON_DIR)};
  const double sep = sentiment_accuracy(true, lex);
  c.expect(sep >= 0.95, "separable held-out accuracy " + num(sep) + " >= 0.95");
  const double null_acc = sentiment_accuracy(false, lex);
  c.expect(std::abs(null_acc - 0.5) <= 0.05, "label-independent accuracy " + num(null_acc) + " within prior 0.5 +- 0.05");

  c.expect(strip_shared_words("come look at idiots", "idiots") == "come look at", "strip_shared_words fixture");
  c.expect(strip_shared_words("alpha beta", "gamma") == "alpha beta", "strip_shared_words disjoint fixture");
  const auto small = make_lexicon("l", {{"anger", {"hate"}}, {"positive", {"joy"}}});
  const auto f = extract_text_features("hate hate joy", std::span(&small, 1));
  c.expect(f.at("l.anger_rate") == 2.0 / 3.0 && f.at("l.positive_rate") == 1.0 / 3.0, "lexicon rate fixture");
  const auto g = extract_text_features("The cat sat.", {});
  c.expect(g.at("flesch_reading_ease") == 206.835 - 1.015 * 3.0 - 84.6 * 1.0 && g.at("avg_word_length") == 3.0 &&
               g.at("punct_period") == 1.0,
           "readability fixture");
}

void reproducibility(Check& c) {
  const auto dir = fx::temp_dir("acceptance_repro");
  SynthSpec spec;
  spec.communities = 5;
  spec.regulars_per_community = 12;
  spec.mobile_per_community = 500;
  spec.crosslinks = 60;
  spec.seed = 99;
  const auto gen = generate_corpus(spec);
  write_events(gen.events, dir / "corpus.jsonl");
  write_sentiment_labels(gen.manifest, dir / "labels.tsv");
  Config cfg;
  cfg.corpus = dir / "corpus.jsonl";
  cfg.labels = dir / "labels.tsv";
  cfg.lexicons = INTERCOM_LEXICON_DIR;
  cfg.sentiment_trees = 50;
  cfg.embed = true;
  cfg.predict = true;
  cfg.dim = 16;
  cfg.embed_epochs = 10;
  cfg.hidden = 8;
  cfg.epochs = 3;
  cfg.ensemble_trees = 50;
  cfg.seed = 17;
  cfg.output = dir / "run1";
  run_pipeline(cfg);
  cfg.output = dir / "run2";
  run_pipeline(cfg);
  const auto a = fx::snapshot(dir / "run1");
  const auto b = fx::snapshot(dir / "run2");
  c.expect(!a.empty() && a == b, "bundles of two identical runs are byte-identical");
  c.expect(validate_bundle(dir / "run1").empty(), "bundle passes schema validation");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"1 null-model detector recall/false positives/baseline", detector},
      {"2 group PageRank oracles", pagerank},
      {"3 embedding gradients and block recovery", embedding},
      {"4 LSTM gradients, reference forward, planted and null tasks", lstm},
      {"5 AUC brute-force agreement", auc_criterion},
      {"6 Mann-Whitney/Wilcoxon exact values and null rates", statistics},
      {"7 sentiment classifier accuracy and fixtures", sentiment},
      {"8 pipeline reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    const auto start = Clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s (%.1fs)\n", c.ok ? "PASS" : "FAIL", name.c_str(), seconds_since(start));
    if (!c.ok) {
      ++failed;
      std::cout << c.notes.str();
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
