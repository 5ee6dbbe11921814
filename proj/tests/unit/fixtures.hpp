#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "intercom/corpus.hpp"
#include "intercom/lexicon.hpp"

namespace fx {

intercom::Event post(std::string id, std::string author, std::string community, intercom::Timestamp t,
                     std::string body = "");
intercom::Event comment(std::string id, std::string author, std::string community, intercom::Timestamp t,
                        std::string thread, std::string parent = "", std::string body = "");

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// anger {hate, angry}, positive {good, love}
intercom::Lexicon small_lexicon();

}  // namespace fx

namespace fx {

// n cross-links from community A into B. In separable mode the source text is
// hostile exactly when the label is negative (1); otherwise tone is an
// independent coin flip.
struct SentimentSet {
  intercom::Corpus corpus;
  std::vector<intercom::CrossLink> links;
  std::vector<int> labels;
};
SentimentSet sentiment_set(std::size_t n, std::uint64_t seed, bool separable);

}  // namespace fx

#include "intercom/embed.hpp"

namespace fx {

// Users in block b post only in communities "b<b>_c<k>"; two blocks.
intercom::BipartiteMultigraph two_block_graph(std::size_t users_per_block, std::size_t communities_per_block,
                                              std::size_t posts_per_user, std::uint64_t seed);

// Fraction of (community, same-block peer, other-block peer) triples where the
// same-block peer is more cosine-similar.
double block_separation(const intercom::EmbeddingTable& table);

}  // namespace fx

#include "intercom/lstm.hpp"

namespace fx {

// Sequences [u, c_s, c_t, w_1..w_L] built from two clusters of community
// vectors; label 1 iff c_t belongs to block B. With `shuffle_labels` the
// labels are permuted, breaking any link to the inputs.
intercom::PredictionDataset planted_sequences(std::size_t n, std::size_t dim, std::uint64_t seed,
                                              bool shuffle_labels = false);

}  // namespace fx

#include <map>

namespace fx {

// Relative path -> file bytes for every regular file under `dir`.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir);

}  // namespace fx
