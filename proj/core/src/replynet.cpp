#include "intercom/replynet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "intercom/error.hpp"
#include "intercom/text.hpp"

namespace intercom {

const char* to_string(Group g) {
  switch (g) {
    case Group::Attacker: return "attacker";
    case Group::Defender: return "defender";
    case Group::Other: break;
  }
  return "other";
}

int ReplyGraph::index_of(std::string_view user) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), user);
  if (it == nodes.end() || *it != user) return -1;
  return static_cast<int>(it - nodes.begin());
}

std::size_t ReplyGraph::count(Group g) const {
  return static_cast<std::size_t>(std::count(groups.begin(), groups.end(), g));
}

ReplyGraph build_reply_graph(const Corpus& corpus, std::string_view thread,
                             const std::set<std::string>& attackers,
                             const std::set<std::string>& defenders,
                             std::optional<TimeWindow> window) {
  ReplyGraph g;
  std::set<std::string> users;
  std::map<std::pair<std::string, std::string>, int> weights;
  for (std::size_t i : corpus.thread_comments(thread)) {
    const Event& c = corpus.comments()[i];
    if (window && !window->contains(c.timestamp)) continue;
    users.insert(c.author);
    if (c.parent_id == c.thread_id) continue;
    const Event* parent = corpus.find_comment(c.parent_id);
    if (!parent || parent->thread_id != c.thread_id) {
      ++g.dangling_parents;
      continue;
    }
    ++weights[{c.author, parent->author}];
  }
  // Reply targets outside the window still become nodes.
  for (const auto& [key, _] : weights) users.insert(key.second);

  g.nodes.assign(users.begin(), users.end());
  for (const auto& u : g.nodes) {
    g.groups.push_back(attackers.count(u) ? Group::Attacker
                       : defenders.count(u) ? Group::Defender
                                            : Group::Other);
  }
  for (const auto& [key, w] : weights) {
    const int s = g.index_of(key.first);
    const int d = g.index_of(key.second);
    if (s == d) ++g.self_loops;
    g.edges.push_back({s, d, w});
  }
  return g;
}

GroupPageRank personalized_pagerank(const ReplyGraph& graph, const std::vector<int>& teleport,
                                    const PageRankOptions& opt) {
  const std::size_t n = graph.nodes.size();
  if (teleport.empty()) throw std::invalid_argument("group_pagerank: empty teleport set");
  if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) throw std::invalid_argument("group_pagerank: alpha must be in (0, 1]");

  std::vector<double> tele(n, 0.0);
  for (int v : teleport) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw std::invalid_argument("group_pagerank: bad teleport node");
    tele[v] = 1.0;
  }
  double tele_total = 0.0;
  for (double t : tele) tele_total += t;
  for (double& t : tele) t /= tele_total;

  std::vector<double> out_weight(n, 0.0);
  for (const auto& e : graph.edges) out_weight[e.src] += e.weight;

  std::vector<double> x = tele;
  std::vector<double> next(n);
  GroupPageRank result;
  result.alpha = opt.alpha;
  const double follow = 1.0 - opt.alpha;
  // The L1 distance to the fixed point is at most change * follow / alpha.
  const double bound = std::max(1.0, follow / opt.alpha);
  for (int it = 1; it <= opt.max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out_weight[i] == 0.0) dangling += x[i];
    }
    for (std::size_t j = 0; j < n; ++j) next[j] = (opt.alpha + follow * dangling) * tele[j];
    for (const auto& e : graph.edges) next[e.dst] += follow * x[e.src] * e.weight / out_weight[e.src];
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - x[i]);
    x.swap(next);
    if (change * bound < opt.tol) {
      double total = 0.0;
      for (double v : x) total += v;
      for (double& v : x) v /= total;
      result.scores = std::move(x);
      result.iterations = it;
      return result;
    }
  }
  throw ConvergenceError("group_pagerank: no convergence after " + std::to_string(opt.max_iter) +
                             " iterations",
                         opt.max_iter);
}

GroupPageRank group_pagerank(const ReplyGraph& graph, TeleportSet set, const PageRankOptions& opt) {
  std::vector<int> teleport;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Group g = graph.groups[i];
    if (set == TeleportSet::All || (set == TeleportSet::Attackers && g == Group::Attacker) ||
        (set == TeleportSet::Defenders && g == Group::Defender)) {
      teleport.push_back(static_cast<int>(i));
    }
  }
  return personalized_pagerank(graph, teleport, opt);
}

EchoReport echo_metrics(const ReplyGraph& graph, const PageRankOptions& opt) {
  EchoReport r;
  r.attackers = graph.count(Group::Attacker);
  r.defenders = graph.count(Group::Defender);
  if (r.attackers == 0 || r.defenders == 0) {
    throw std::invalid_argument("echo_metrics: graph needs at least one attacker and one defender");
  }
  double defender_out_total = 0.0;
  for (const auto& e : graph.edges) {
    const Group s = graph.groups[e.src];
    const Group d = graph.groups[e.dst];
    if (s == Group::Defender) defender_out_total += e.weight;
    if (s == Group::Attacker && d == Group::Attacker) r.attacker_to_attacker += e.weight;
    if (s == Group::Attacker && d == Group::Defender) r.attacker_to_defender += e.weight;
    if (s == Group::Defender && d == Group::Attacker) r.defender_to_attacker += e.weight;
    if (s == Group::Defender && d == Group::Defender) r.defender_to_defender += e.weight;
  }
  const double cross = r.attacker_to_defender + r.defender_to_attacker;
  const double total = cross + r.attacker_to_attacker + r.defender_to_defender;
  if (cross > 0.0) {
    r.attacker_echo_ratio = r.attacker_to_attacker / cross;
    r.defender_echo_ratio = r.defender_to_defender / cross;
  }
  r.cross_group_fraction = total > 0.0 ? cross / total : 0.0;
  r.defender_reply_fraction_to_attackers =
      defender_out_total > 0.0 ? r.defender_to_attacker / defender_out_total : 0.0;

  const auto apr = group_pagerank(graph, TeleportSet::Attackers, opt);
  const auto dpr = group_pagerank(graph, TeleportSet::Defenders, opt);
  double group_sum = 0.0;
  double attacker_dpr = 0.0;
  double defender_apr = 0.0;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.groups[i] == Group::Other) continue;
    group_sum += apr.scores[i];
    if (graph.groups[i] == Group::Attacker) attacker_dpr += dpr.scores[i];
    if (graph.groups[i] == Group::Defender) defender_apr += apr.scores[i];
  }
  const double mean_apr = group_sum / static_cast<double>(r.attackers + r.defenders);
  std::size_t zero = 0;
  std::size_t ganged = 0;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.groups[i] != Group::Defender) continue;
    if (apr.scores[i] == 0.0) ++zero;
    if (apr.scores[i] >= 10.0 * mean_apr) ++ganged;
  }
  const double nd = static_cast<double>(r.defenders);
  r.defenders_zero_apr_fraction = static_cast<double>(zero) / nd;
  r.defenders_ganged_up_fraction = static_cast<double>(ganged) / nd;
  r.mean_defender_apr = defender_apr / nd;
  r.mean_attacker_dpr = attacker_dpr / static_cast<double>(r.attackers);
  return r;
}

std::optional<double> anger_rate(const Corpus& corpus, std::string_view thread,
                                 const ReplyGraph& graph, const Lexicon& lexicon, Group from,
                                 Group to, std::optional<TimeWindow> window) {
  if (!lexicon.has_category("anger")) throw DataError("anger_rate: lexicon has no `anger` category");
  auto group_of = [&](const std::string& user) {
    const int i = graph.index_of(user);
    return i < 0 ? Group::Other : graph.groups[i];
  };
  std::size_t tokens = 0;
  std::size_t angry = 0;
  for (std::size_t i : corpus.thread_comments(thread)) {
    const Event& c = corpus.comments()[i];
    if (window && !window->contains(c.timestamp)) continue;
    if (c.parent_id == c.thread_id) continue;
    const Event* parent = corpus.find_comment(c.parent_id);
    if (!parent || parent->thread_id != c.thread_id) continue;
    if (group_of(c.author) != from || group_of(parent->author) != to) continue;
    for (const auto& w : tokenize_words(c.body)) {
      ++tokens;
      angry += lexicon.contains("anger", w);
    }
  }
  if (tokens == 0) return std::nullopt;
  return static_cast<double>(angry) / static_cast<double>(tokens);
}

void write_edge_list(const ReplyGraph& graph, std::ostream& out) {
  for (const auto& e : graph.edges) {
    out << graph.nodes[e.src] << ' ' << graph.nodes[e.dst] << ' ' << e.weight << ' '
        << to_string(graph.groups[e.src]) << ' ' << to_string(graph.groups[e.dst]) << '\n';
  }
}

}  // namespace intercom
