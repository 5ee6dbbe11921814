#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "intercom/corpus.hpp"
#include "intercom/lexicon.hpp"

namespace intercom {

enum class Group { Attacker, Defender, Other };
const char* to_string(Group g);

struct ReplyEdge {
  int src = 0;
  int dst = 0;
  int weight = 0;  // number of src comments replying to a dst comment
};

// Directed, weighted user-user reply graph of one thread.
struct ReplyGraph {
  std::vector<std::string> nodes;  // sorted user ids
  std::vector<Group> groups;       // parallel to nodes
  std::vector<ReplyEdge> edges;    // sorted by (src, dst), weights > 0
  std::size_t self_loops = 0;
  std::size_t dangling_parents = 0;

  int index_of(std::string_view user) const;  // -1 when absent
  std::size_t count(Group g) const;
};

// Replies to the post itself create no edge; comments whose parent id does not
// resolve are skipped and counted. When `window` is set only comments inside
// it are considered.
ReplyGraph build_reply_graph(const Corpus& corpus, std::string_view thread,
                             const std::set<std::string>& attackers,
                             const std::set<std::string>& defenders,
                             std::optional<TimeWindow> window = std::nullopt);

enum class TeleportSet { Attackers, Defenders, All };

struct PageRankOptions {
  double alpha = 0.25;  // teleport probability (damping 0.75)
  double tol = 1e-10;   // bound on the L1 distance to the fixed point
  int max_iter = 10000;
};

struct GroupPageRank {
  std::vector<double> scores;  // parallel to ReplyGraph::nodes
  double alpha = 0.25;
  int iterations = 0;
};

// Random walk on reply edges (transition proportional to weight) that jumps
// uniformly into the teleport set with probability alpha; dangling nodes send
// their mass to the teleport set. Throws std::invalid_argument for an empty
// teleport set and ConvergenceError when max_iter is exhausted.
GroupPageRank personalized_pagerank(const ReplyGraph& graph, const std::vector<int>& teleport,
                                    const PageRankOptions& options = {});
GroupPageRank group_pagerank(const ReplyGraph& graph, TeleportSet set,
                             const PageRankOptions& options = {});

struct EchoReport {
  std::size_t attackers = 0;
  std::size_t defenders = 0;
  // Reply weight totals by (from group, to group).
  double attacker_to_attacker = 0.0;
  double attacker_to_defender = 0.0;
  double defender_to_attacker = 0.0;
  double defender_to_defender = 0.0;
  // Within-group weight over cross-group weight (both directions); empty when
  // there is no cross-group interaction.
  std::optional<double> attacker_echo_ratio;
  std::optional<double> defender_echo_ratio;
  // Cross-group share of all attacker/defender reply weight.
  double cross_group_fraction = 0.0;
  // Share of defenders' replies that go to attackers.
  double defender_reply_fraction_to_attackers = 0.0;
  // Defenders with A-PageRank exactly 0 (unreachable from attackers).
  double defenders_zero_apr_fraction = 0.0;
  // Defenders with A-PageRank >= 10x the mean over attackers and defenders.
  double defenders_ganged_up_fraction = 0.0;
  double mean_defender_apr = 0.0;
  double mean_attacker_dpr = 0.0;
};

// Throws std::invalid_argument when the graph has no attacker or no defender.
EchoReport echo_metrics(const ReplyGraph& graph, const PageRankOptions& options = {});

// Anger-token rate over direct replies from `from` users to `to` users in a
// thread. Returns nullopt (no data) when there is no such reply with tokens.
std::optional<double> anger_rate(const Corpus& corpus, std::string_view thread,
                                 const ReplyGraph& graph, const Lexicon& lexicon, Group from,
                                 Group to, std::optional<TimeWindow> window = std::nullopt);

// `src dst weight group(src) group(dst)` per line.
void write_edge_list(const ReplyGraph& graph, std::ostream& out);

}  // namespace intercom
