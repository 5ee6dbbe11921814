#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "intercom/corpus.hpp"

namespace intercom {

// Parameters of a synthetic event log with planted cross-links.
//
// Each community has `regulars_per_community` users who write the background
// posts and comments, and `mobile_per_community` users who take part in at
// most one planted interaction each. Planted links are spaced one day apart
// after a warm-up month so every participant has membership history.
struct SynthSpec {
  int communities = 8;
  int regulars_per_community = 30;
  int mobile_per_community = 600;
  double posts_per_day = 2.0;       // background posts per community per day
  int comments_per_post = 4;        // mean background comments per post
  int crosslinks = 200;
  double mobilized_fraction = 0.5;  // share of links planted with a burst
  double burst_ratio = 5.0;         // minimum smoothed ratio of a burst
  double quiet_ratio = 0.5;         // smoothed ratio of a link without a burst
  double matched_ratio = 1.6;       // smoothed ratio on every matched thread
  double negative_fraction = 0.5;   // share of links whose source post is hostile
  int max_defenders = 4;
  Timestamp start = 1600000000;
  std::uint64_t seed = 0;
};

struct PlantedLink {
  std::string source_post;
  std::string target_post;
  std::string matched_post;
  std::string source_community;
  std::string target_community;
  Timestamp t0 = 0;
  std::size_t before = 0;  // source-member comments on the target thread in [t0-12h, t0)
  std::size_t after = 0;   // and in [t0, t0+12h)
  double ratio = 0.0;      // (after + 1) / (before + 1)
  bool mobilized = false;
  bool negative = false;
  std::set<std::string> attackers;
  std::set<std::string> defenders;
};

struct SynthManifest {
  std::uint64_t seed = 0;
  double matched_ratio = 0.0;  // realized smoothed ratio on matched threads
  std::vector<PlantedLink> links;  // in t0 order

  std::size_t mobilization_count() const;
};

struct SynthCorpus {
  std::vector<Event> events;  // sorted by (timestamp, id)
  SynthManifest manifest;
};

// Throws std::invalid_argument for an invalid spec and Error when the
// planted interactions need more mobile users than a community has.
SynthCorpus generate_corpus(const SynthSpec& spec);

void write_events(const std::vector<Event>& events, const std::filesystem::path& path);
std::string manifest_json(const SynthManifest& manifest);
// `<source_post>\t<negative|neutral>` per planted link.
void write_sentiment_labels(const SynthManifest& manifest, const std::filesystem::path& path);

// Words the generator uses for hostile and friendly source posts.
const std::vector<std::string>& synth_hostile_words();
const std::vector<std::string>& synth_friendly_words();

}  // namespace intercom
