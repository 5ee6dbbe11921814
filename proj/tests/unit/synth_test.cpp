#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "intercom/error.hpp"
#include "intercom/mobilization.hpp"
#include "intercom/synth.hpp"
#include "json.hpp"

using namespace intercom;

namespace {

SynthSpec small(std::uint64_t seed, int links = 40) {
  SynthSpec s;
  s.communities = 4;
  s.regulars_per_community = 10;
  s.mobile_per_community = 400;
  s.crosslinks = links;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Synth, ZeroLinks) {
  const auto c = generate_corpus(small(1, 0));
  EXPECT_TRUE(c.manifest.links.empty());
  EXPECT_EQ(c.manifest.mobilization_count(), 0u);
  const auto corpus = Corpus::from_events(c.events);
  EXPECT_TRUE(extract_crosslinks(corpus).links.empty());
}

TEST(Synth, DeterministicOutput) {
  const auto dir = fx::temp_dir("synth_det");
  const auto a = generate_corpus(small(5));
  const auto b = generate_corpus(small(5));
  write_events(a.events, dir / "a.jsonl");
  write_events(b.events, dir / "b.jsonl");
  EXPECT_EQ(fx::read_text(dir / "a.jsonl"), fx::read_text(dir / "b.jsonl"));
  EXPECT_EQ(manifest_json(a.manifest), manifest_json(b.manifest));
  const auto c = generate_corpus(small(6));
  EXPECT_NE(manifest_json(a.manifest), manifest_json(c.manifest));
}

TEST(Synth, RejectsInvalidAndInfeasibleSpecs) {
  auto bad = small(1);
  bad.communities = 1;
  EXPECT_THROW(generate_corpus(bad), std::invalid_argument);
  auto tiny = small(1, 100);
  tiny.mobile_per_community = 5;
  EXPECT_THROW(generate_corpus(tiny), Error);
}

TEST(Synth, PlantedCountsMatchDetector) {
  const auto gen = generate_corpus(small(7, 60));
  const auto corpus = Corpus::from_events(gen.events);
  const auto links = extract_crosslinks(corpus);
  ASSERT_EQ(links.links.size(), gen.manifest.links.size());
  const auto base = baseline_ratio(corpus, links);
  EXPECT_NEAR(base.baseline, 1.6, 1e-9);
  for (std::size_t i = 0; i < links.links.size(); ++i) {
    const auto& planted = gen.manifest.links[i];
    ASSERT_EQ(links.links[i].source_post, planted.source_post);
    const auto rec = detect(corpus, links.links[i], base.baseline);
    EXPECT_EQ(rec.before_count, planted.before);
    EXPECT_EQ(rec.after_count, planted.after);
    EXPECT_EQ(rec.is_mobilization(), planted.mobilized);
    if (planted.mobilized) {
      EXPECT_EQ(rec.attackers, planted.attackers);
      EXPECT_EQ(rec.defenders, planted.defenders);
    }
  }
}

TEST(Synth, FractionsAndRatios) {
  const auto gen = generate_corpus(small(8, 40));
  std::size_t mobilized = 0, negative = 0;
  for (const auto& l : gen.manifest.links) {
    mobilized += l.mobilized;
    negative += l.negative;
    if (l.mobilized) EXPECT_GE(l.ratio, 5.0);
    else EXPECT_LE(l.ratio, 0.5);
  }
  EXPECT_EQ(mobilized, 20u);
  EXPECT_EQ(negative, 20u);
  EXPECT_EQ(gen.manifest.mobilization_count(), 20u);
}

TEST(Synth, ManifestAndLabelFiles) {
  const auto gen = generate_corpus(small(9, 10));
  const auto j = nlohmann::json::parse(manifest_json(gen.manifest));
  EXPECT_EQ(j["links"].size(), 10u);
  const auto dir = fx::temp_dir("synth_labels");
  write_sentiment_labels(gen.manifest, dir / "labels.tsv");
  const auto text = fx::read_text(dir / "labels.tsv");
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  EXPECT_EQ(lines, 10u);
}
