#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "intercom/pipeline.hpp"
#include "intercom/synth.hpp"
#include "json.hpp"

using namespace intercom;
namespace fs = std::filesystem;

namespace {

struct Run {
  fs::path dir;
  Config config;
  SynthManifest manifest;
};

Run prepare(const std::string& name, int links, bool predict) {
  Run r;
  r.dir = fx::temp_dir(name);
  SynthSpec spec;
  spec.communities = 4;
  spec.regulars_per_community = 10;
  spec.mobile_per_community = 400;
  spec.crosslinks = links;
  spec.seed = 3;
  const auto gen = generate_corpus(spec);
  write_events(gen.events, r.dir / "corpus.jsonl");
  write_sentiment_labels(gen.manifest, r.dir / "labels.tsv");
  r.manifest = gen.manifest;
  r.config.corpus = r.dir / "corpus.jsonl";
  r.config.labels = r.dir / "labels.tsv";
  r.config.lexicons = INTERCOM_LEXICON_DIR;
  r.config.models = r.dir / "models";
  r.config.output = r.dir / "out";
  r.config.sentiment_trees = 30;
  r.config.embed = predict;
  r.config.predict = predict;
  r.config.dim = 8;
  r.config.embed_epochs = 3;
  r.config.hidden = 4;
  r.config.epochs = 2;
  r.config.ensemble_trees = 20;
  return r;
}

std::size_t count_lines(const fs::path& p) {
  const auto text = fx::read_text(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST(Pipeline, EmptyCorpusGivesValidBundle) {
  const auto dir = fx::temp_dir("pipe_empty");
  fx::write_text(dir / "corpus.jsonl", "");
  Config c;
  c.corpus = dir / "corpus.jsonl";
  c.output = dir / "out";
  const auto r = run_pipeline(c);
  EXPECT_EQ(r.crosslinks, 0u);
  EXPECT_EQ(r.mobilizations, 0u);
  EXPECT_TRUE(validate_bundle(c.output).empty());
  const auto m = nlohmann::json::parse(fx::read_text(c.output / "manifest.json"));
  EXPECT_EQ(m["status"], "complete");
  EXPECT_EQ(m["files"].size(), bundle_schema().size());
}

TEST(Pipeline, PlantedCorpusCounts) {
  const auto run = prepare("pipe_counts", 30, false);
  const auto r = run_pipeline(run.config);
  EXPECT_EQ(r.crosslinks, 30u);
  EXPECT_EQ(r.mobilizations, run.manifest.mobilization_count());
  EXPECT_NEAR(r.baseline, 1.6, 1e-9);
  EXPECT_EQ(count_lines(run.config.output / "mobilizations.jsonl"), 30u);
  std::size_t flagged = 0;
  std::ifstream in(run.config.output / "mobilizations.jsonl");
  for (std::string line; std::getline(in, line);) {
    flagged += nlohmann::json::parse(line)["verdict"] == "mobilization";
  }
  EXPECT_EQ(flagged, r.mobilizations);
  EXPECT_TRUE(validate_bundle(run.config.output).empty());
}

TEST(Pipeline, RerunIsByteIdenticalAndUsesCache) {
  auto run = prepare("pipe_rerun", 24, true);
  const auto first = run_pipeline(run.config);
  EXPECT_TRUE(first.cache_hits.empty());
  const auto a = fx::snapshot(run.config.output);
  const auto second = run_pipeline(run.config);
  EXPECT_FALSE(second.cache_hits.empty());
  EXPECT_EQ(fx::snapshot(run.config.output), a);

  run.config.models = run.dir / "models_cold";
  run.config.output = run.dir / "out_cold";
  run_pipeline(run.config);
  EXPECT_EQ(fx::snapshot(run.config.output), a);
}

TEST(Pipeline, StageFailureIsReported) {
  auto run = prepare("pipe_fail", 5, false);
  run.config.lexicons = run.dir / "missing";
  try {
    run_pipeline(run.config);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "sentiment");
    EXPECT_TRUE(e.data_error());
  }
  const auto m = nlohmann::json::parse(fx::read_text(run.config.output / "manifest.json"));
  EXPECT_EQ(m["status"], "failed");
  EXPECT_EQ(m["failed_stage"], "sentiment");
}

TEST(Pipeline, MissingCorpusFailsIngest) {
  const auto dir = fx::temp_dir("pipe_nocorpus");
  Config c;
  c.corpus = dir / "nope.jsonl";
  c.output = dir / "out";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
}

TEST(Pipeline, ValidateBundleFindsTampering) {
  const auto run = prepare("pipe_tamper", 10, false);
  run_pipeline(run.config);
  fx::write_text(run.config.output / "impact.csv", "garbage\n");
  EXPECT_FALSE(validate_bundle(run.config.output).empty());
}

TEST(Pipeline, LoadsLexiconsAndLabels) {
  const auto lex = load_lexicons(INTERCOM_LEXICON_DIR);
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_TRUE(load_lexicons("").empty());
  const auto dir = fx::temp_dir("pipe_labels");
  fx::write_text(dir / "l.tsv", "p1\tnegative\np2\tneutral\n");
  const auto labels = load_sentiment_labels(dir / "l.tsv");
  EXPECT_EQ(labels.at("p1"), Sentiment::Negative);
  EXPECT_EQ(labels.at("p2"), Sentiment::Neutral);
}
