#include "fixtures.hpp"

#include "intercom/synth.hpp"

#include <fstream>
#include <algorithm>
#include <random>
#include <sstream>

namespace fx {

using namespace intercom;

Event post(std::string id, std::string author, std::string community, Timestamp t, std::string body) {
  Event e;
  e.kind = EventKind::Post;
  e.id = std::move(id);
  e.author = std::move(author);
  e.community = std::move(community);
  e.timestamp = t;
  e.body = std::move(body);
  return e;
}

Event comment(std::string id, std::string author, std::string community, Timestamp t, std::string thread,
              std::string parent, std::string body) {
  Event e;
  e.kind = EventKind::Comment;
  e.id = std::move(id);
  e.author = std::move(author);
  e.community = std::move(community);
  e.timestamp = t;
  e.parent_id = parent.empty() ? thread : std::move(parent);
  e.thread_id = std::move(thread);
  e.body = std::move(body);
  return e;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("intercom_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Lexicon small_lexicon() {
  return make_lexicon("lex", {{"anger", {"hate", "angry"}}, {"positive", {"good", "love"}}});
}

SentimentSet sentiment_set(std::size_t n, std::uint64_t seed, bool separable) {
  static const std::vector<std::string> filler = {"the", "this", "thread", "over", "there", "people",
                                                  "post", "about", "look", "what", "they", "said"};
  const auto& hostile = synth_hostile_words();
  const auto& friendly = synth_friendly_words();
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& words) {
    return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
  };
  SentimentSet set;
  std::vector<Event> ev;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
    const bool hostile_tone = separable ? label == 1 : std::bernoulli_distribution(0.5)(rng);
    const std::string tid = "t" + std::to_string(i);
    const Timestamp t = static_cast<Timestamp>(i) * kHour;
    std::string target;
    for (int k = 0; k < 8; ++k) target += pick(filler) + " ";
    std::string source = "https://www.reddit.com/r/B/comments/" + tid;
    const int words = std::uniform_int_distribution<int>(6, 14)(rng);
    for (int k = 0; k < words; ++k) {
      const bool tone = std::bernoulli_distribution(0.4)(rng);
      source += " " + (tone ? pick(hostile_tone ? hostile : friendly) : pick(filler));
    }
    ev.push_back(post(tid, "bu" + std::to_string(i), "B", t, target));
    ev.push_back(post("s" + std::to_string(i), "au" + std::to_string(i), "A", t + 60, source));
    labels.push_back(label);
  }
  set.corpus = Corpus::from_events(std::move(ev));
  set.links = extract_crosslinks(set.corpus).links;
  for (const auto& link : set.links) set.labels.push_back(labels[std::stoul(link.source_post.substr(1))]);
  return set;
}

BipartiteMultigraph two_block_graph(std::size_t users_per_block, std::size_t communities_per_block,
                                    std::size_t posts_per_user, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, communities_per_block - 1);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int b = 0; b < 2; ++b) {
    for (std::size_t u = 0; u < users_per_block; ++u) {
      const std::string user = "b" + std::to_string(b) + "_u" + std::to_string(u);
      for (std::size_t k = 0; k < posts_per_user; ++k) {
        pairs.emplace_back(user, "b" + std::to_string(b) + "_c" + std::to_string(pick(rng)));
      }
    }
  }
  return BipartiteMultigraph::from_pairs(pairs);
}

double block_separation(const EmbeddingTable& table) {
  const auto& ids = table.communities.ids();
  std::size_t good = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (j == i || ids[j][1] != ids[i][1]) continue;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k][1] == ids[i][1]) continue;
        ++total;
        good += cosine(table.communities.row(i), table.communities.row(j)) >
                cosine(table.communities.row(i), table.communities.row(k));
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total);
}

PredictionDataset planted_sequences(std::size_t n, std::size_t dim, std::uint64_t seed, bool shuffle_labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::normal_distribution<double> unit(0.0, 1.0);
  constexpr int kCommunities = 10;
  // Communities 0-4 form block A, 5-9 block B; the blocks differ along a random direction.
  Eigen::VectorXd axis(dim);
  for (auto& v : axis) v = unit(rng);
  axis.normalize();
  std::vector<Eigen::VectorXd> comm;
  for (int k = 0; k < kCommunities; ++k) {
    Eigen::VectorXd v(dim);
    for (auto& x : v) x = noise(rng);
    comm.push_back(v + (k < 5 ? 1.0 : -1.0) * axis);
  }
  PredictionDataset data;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int src = std::uniform_int_distribution<int>(0, kCommunities - 1)(rng);
    const int tgt = std::uniform_int_distribution<int>(0, kCommunities - 1)(rng);
    const int words = std::uniform_int_distribution<int>(0, 5)(rng);
    SocialSequence s;
    s.inputs.resize(static_cast<Eigen::Index>(dim), 3 + words);
    for (Eigen::Index r = 0; r < s.inputs.rows(); ++r) s.inputs(r, 0) = unit(rng) * 0.5;
    s.inputs.col(1) = comm[src];
    s.inputs.col(2) = comm[tgt];
    for (int w = 0; w < words; ++w) {
      for (Eigen::Index r = 0; r < s.inputs.rows(); ++r) s.inputs(r, 3 + w) = unit(rng) * 0.5;
    }
    s.label = tgt >= 5 ? 1 : 0;
    labels.push_back(s.label);
    data.sequences.push_back(std::move(s));
  }
  if (shuffle_labels) {
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < n; ++i) data.sequences[i].label = labels[i];
  }
  data.split = split_80_10_10(n, seed + 1);
  return data;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[std::filesystem::relative(e.path(), dir).generic_string()] = read_text(e.path());
  }
  return files;
}

}  // namespace fx
