#include "intercom/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "intercom/auc.hpp"
#include "intercom/embed.hpp"
#include "intercom/impact.hpp"
#include "intercom/log.hpp"
#include "intercom/lstm.hpp"
#include "intercom/predictor.hpp"
#include "intercom/random.hpp"
#include "intercom/replynet.hpp"
#include "intercom/sentiment.hpp"
#include "intercom/stats.hpp"
#include "intercom/text.hpp"
#include "intercom/tfidf.hpp"
#include "json.hpp"

namespace intercom {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kBundleVersion = 1;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }
ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

class TableWriter {
 public:
  TableWriter(const fs::path& path, const std::string& header, char sep = ',')
      : out_(path, std::ios::binary), sep_(sep) {
    if (!out_) throw DataError("cannot write " + path.string());
    out_ << header << '\n';
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << sep_;
      out_ << (sep_ == ',' ? csv_field(fields[i]) : fields[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  char sep_;
};

void write_json(const fs::path& path, const ojson& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

const std::vector<BundleFile> kSchema = {
    {"summary.json", ""},
    {"ingest.json", ""},
    {"crosslinks.csv", "source_post,target_post,source_community,target_community,t0,author"},
    {"baseline.json", ""},
    {"baseline_pairs.csv",
     "source_post,target_post,matched_post,target_precount,matched_precount,matched_before,matched_after,eligible"},
    {"mobilizations.jsonl", ""},
    {"sentiment.csv", "source_post,label,probability_negative"},
    {"replynet.csv",
     "mobilization,nodes,edges,attackers,defenders,attacker_to_attacker,attacker_to_defender,"
     "defender_to_attacker,defender_to_defender,attacker_echo_ratio,defender_echo_ratio,"
     "cross_group_fraction,defender_reply_fraction_to_attackers,defenders_zero_apr_fraction,"
     "defenders_ganged_up_fraction,mean_defender_apr,mean_attacker_dpr,"
     "anger_attacker_to_defender,anger_attacker_to_attacker,anger_defender_to_attacker"},
    {"reply_edges.tsv", "mobilization\tsrc\tdst\tweight\tsrc_group\tdst_group"},
    {"impact.csv", "mobilization,user,role,delta,matched_user,matched_delta,low_support"},
    {"defense.csv", "mobilization,success_score,decile,defenders"},
    {"series.csv", "metric,x,y,smoothed"},
    {"tests.json", ""},
    {"prediction.json", ""},
    {"predictions.csv", "source_post,split,label,baseline,lstm,ensemble"},
    {"alerts.jsonl", ""},
};

const std::string& header_of(std::string_view name) {
  for (const auto& f : kSchema) {
    if (f.name == name) return f.header;
  }
  throw std::logic_error("bundle schema has no file " + std::string(name));
}

std::uint64_t lexicon_fingerprint(const std::vector<Lexicon>& lexicons) {
  std::uint64_t h = fnv1a64("lexicons");
  for (const auto& lex : lexicons) {
    h = fnv1a64(lex.name, h);
    for (const auto& [cat, words] : lex.categories) {
      h = fnv1a64(cat, h);
      for (const auto& w : words) h = fnv1a64(w + "\n", h);
    }
  }
  return h;
}

const Lexicon* anger_lexicon(const std::vector<Lexicon>& lexicons) {
  for (const auto& lex : lexicons) {
    if (lex.has_category("anger")) return &lex;
  }
  return nullptr;
}

struct Cache {
  fs::path dir;
  std::vector<std::string>* hits;

  // Returns the cached artifact path for `name`, creating the directory.
  std::optional<fs::path> path(const std::string& name) const {
    if (dir.empty()) return std::nullopt;
    fs::create_directories(dir);
    return dir / name;
  }

  template <typename T>
  T get(const std::string& name, const std::function<T(const fs::path&)>& load,
        const std::function<T()>& make, const std::function<void(const T&, const fs::path&)>& save) const {
    const auto p = path(name);
    if (p && fs::exists(*p)) {
      hits->push_back(name);
      log_info("cache hit: " + p->string());
      return load(*p);
    }
    T value = make();
    if (p) {
      const fs::path tmp = p->string() + ".tmp";
      save(value, tmp);
      fs::rename(tmp, *p);
    }
    return value;
  }
};

}  // namespace

std::vector<Lexicon> load_lexicons(const fs::path& path) {
  std::vector<Lexicon> out;
  if (path.empty()) return out;
  if (!fs::is_directory(path)) throw DataError("lexicon path is not a directory: " + path.string());
  std::vector<fs::path> subdirs;
  bool has_lists = false;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
    if (entry.is_regular_file() && entry.path().extension() == ".txt") has_lists = true;
  }
  if (has_lists) {
    out.push_back(load_lexicon(path));
    return out;
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) out.push_back(load_lexicon(d));
  return out;
}

std::map<std::string, Sentiment> load_sentiment_labels(const fs::path& path) {
  std::map<std::string, Sentiment> labels;
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string id, label;
    if (!(fields >> id)) continue;
    if (!(fields >> label)) throw DataError(path.string() + ":" + std::to_string(lineno) + ": missing label");
    label = to_lower(label);
    if (label == "negative" || label == "1") labels[id] = Sentiment::Negative;
    else if (label == "neutral" || label == "0") labels[id] = Sentiment::Neutral;
    else throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown label '" + label + "'");
  }
  return labels;
}

Detection run_detection(const Corpus& corpus, const Config& config) {
  Detection d;
  const auto half = static_cast<Timestamp>(config.window_hours * static_cast<double>(kHour));
  CrosslinkOptions copt;
  copt.host_allowlist = config.hosts;
  copt.analysis_half_window = half;
  d.crosslinks = extract_crosslinks(corpus, copt);

  DetectorOptions dopt;
  dopt.half_window = half;
  dopt.smoothing = config.smoothing;
  if (config.baseline) {
    d.baseline_value = *config.baseline;
  } else if (!d.crosslinks.links.empty()) {
    BaselineOptions bopt;
    bopt.statistic = config.baseline_statistic;
    bopt.detector = dopt;
    d.baseline = baseline_ratio(corpus, d.crosslinks, bopt);
    d.baseline_value = d.baseline->baseline;
  }
  for (std::size_t i = 0; i < d.crosslinks.links.size(); ++i) {
    auto rec = detect(corpus, d.crosslinks.links[i], d.baseline_value, dopt);
    if (d.baseline) {
      const auto& pair = d.baseline->pairs[i];
      if (!pair.matched_post.empty()) {
        rec.matched_post = pair.matched_post;
        rec.matched_before = pair.matched_counts.before;
        rec.matched_after = pair.matched_counts.after;
      }
    }
    d.records.push_back(std::move(rec));
  }
  return d;
}

Forest train_sentiment_model(const Corpus& corpus, const std::vector<CrossLink>& links,
                             const std::map<std::string, Sentiment>& labels,
                             const std::vector<Lexicon>& lexicons, const Config& config) {
  std::vector<FeatureVector> x;
  std::vector<int> y;
  for (const auto& link : links) {
    const auto it = labels.find(link.source_post);
    if (it == labels.end()) continue;
    x.push_back(sentiment_features(link, corpus, lexicons));
    y.push_back(it->second == Sentiment::Negative ? 1 : 0);
  }
  ForestOptions fo;
  fo.trees = config.sentiment_trees;
  fo.seed = derive_seed(config.seed, "sentiment");
  fo.threads = config.threads;
  return train_forest(x, y, fo);
}

const std::vector<BundleFile>& bundle_schema() { return kSchema; }

std::vector<std::string> validate_bundle(const fs::path& dir) {
  std::vector<std::string> problems;
  const auto check_json = [&](const fs::path& p, bool lines) {
    std::istringstream in(read_file(p));
    if (!lines) {
      if (!nlohmann::json::accept(in)) problems.push_back(p.filename().string() + ": invalid JSON");
      return;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (!nlohmann::json::accept(line)) {
        problems.push_back(p.filename().string() + ": invalid JSON line");
        return;
      }
    }
  };
  if (!fs::exists(dir / "manifest.json")) {
    problems.push_back("manifest.json missing");
  } else {
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"), nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("files") || !manifest.contains("version")) {
      problems.push_back("manifest.json: malformed");
    } else {
      for (const auto& f : manifest["files"]) {
        const fs::path p = dir / f["name"].get<std::string>();
        if (!fs::exists(p)) continue;
        if (hex(fnv1a64(read_file(p))) != f["fnv1a64"].get<std::string>()) {
          problems.push_back(p.filename().string() + ": checksum differs from manifest");
        }
      }
    }
  }
  for (const auto& f : kSchema) {
    const fs::path p = dir / f.name;
    if (!fs::exists(p)) {
      problems.push_back(f.name + " missing");
      continue;
    }
    if (f.header.empty()) {
      check_json(p, p.extension() == ".jsonl");
      continue;
    }
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    if (first != f.header) problems.push_back(f.name + ": unexpected header");
  }
  return problems;
}

PipelineResult run_pipeline(const Config& config) {
  validate(config);
  if (config.output.empty()) throw ConfigError("config: output directory is required");
  if (config.corpus.empty()) throw ConfigError("config: corpus path is required");

  PipelineResult result;
  result.bundle = config.output;
  const fs::path out = config.output;
  fs::create_directories(out);
  Cache cache{config.models, &result.cache_hits};

  const auto write_manifest = [&](const std::string& status, const std::string& failed_stage,
                                  std::uint64_t fingerprint) {
    ojson m;
    m["format"] = "intercom-report";
    m["version"] = kBundleVersion;
    m["status"] = status;
    if (!failed_stage.empty()) m["failed_stage"] = failed_stage;
    m["fingerprint"] = hex(fingerprint);
    m["stages"] = result.stages;
    m["files"] = ojson::array();
    for (const auto& f : kSchema) {
      const fs::path p = out / f.name;
      if (!fs::exists(p)) continue;
      const std::string content = read_file(p);
      ojson e;
      e["name"] = f.name;
      e["rows"] = std::count(content.begin(), content.end(), '\n') - (f.header.empty() ? 0 : 1);
      e["fnv1a64"] = hex(fnv1a64(content));
      m["files"].push_back(std::move(e));
    }
    write_json(out / "manifest.json", m);
  };

  std::uint64_t fingerprint = 0;
  const auto stage = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
      result.stages.push_back(name);
      log_info("stage " + name + " done");
    } catch (const std::exception& e) {
      try {
        write_manifest("failed", name, fingerprint);
      } catch (const std::exception&) {
      }
      throw StageError(name, e.what(), dynamic_cast<const DataError*>(&e) != nullptr);
    }
  };

  // Settings that change results; output locations are excluded.
  Config keyed = config;
  keyed.output.clear();
  keyed.models.clear();
  keyed.corpus.clear();
  keyed.threads = 1;

  Corpus corpus;
  std::uint64_t corpus_hash = 0;
  stage("ingest", [&] {
    const std::string raw = read_file(config.corpus);
    corpus_hash = fnv1a64(raw);
    auto loaded = load_events(config.corpus);
    corpus = std::move(loaded.corpus);
    fingerprint = fnv1a64(to_string(keyed), corpus_hash);
    ojson j;
    j["lines"] = loaded.stats.lines;
    j["blank"] = loaded.stats.blank;
    j["rejected"] = loaded.stats.rejected;
    j["duplicate_ids"] = loaded.stats.duplicate_ids;
    j["orphan_comments"] = loaded.stats.orphan_comments;
    j["posts"] = corpus.posts().size();
    j["comments"] = corpus.comments().size();
    j["communities"] = corpus.communities().size();
    j["users"] = corpus.users().size();
    j["first_errors"] = loaded.stats.first_errors;
    write_json(out / "ingest.json", j);
  });

  Detection det;
  const auto half = static_cast<Timestamp>(config.window_hours * static_cast<double>(kHour));
  stage("crosslinks", [&] {
    CrosslinkOptions copt;
    copt.host_allowlist = config.hosts;
    copt.analysis_half_window = half;
    det.crosslinks = extract_crosslinks(corpus, copt);
    TableWriter t(out / "crosslinks.csv", header_of("crosslinks.csv"));
    for (const auto& l : det.crosslinks.links) {
      t.row({l.source_post, l.target_post, l.source_community, l.target_community, std::to_string(l.t0), l.author});
    }
  });

  DetectorOptions dopt;
  dopt.half_window = half;
  dopt.smoothing = config.smoothing;
  stage("baseline", [&] {
    std::string source = "none";
    if (config.baseline) {
      det.baseline_value = *config.baseline;
      source = "fixed";
    } else if (!det.crosslinks.links.empty()) {
      BaselineOptions bopt;
      bopt.statistic = config.baseline_statistic;
      bopt.detector = dopt;
      det.baseline = baseline_ratio(corpus, det.crosslinks, bopt);
      det.baseline_value = det.baseline->baseline;
      source = "matched";
    }
    TableWriter t(out / "baseline_pairs.csv", header_of("baseline_pairs.csv"));
    if (det.baseline) {
      for (const auto& p : det.baseline->pairs) {
        const bool matched = !p.matched_post.empty();
        t.row({p.source_post, p.target_post, p.matched_post, std::to_string(p.target_precount),
               matched ? std::to_string(p.matched_precount) : "",
               matched ? std::to_string(p.matched_counts.before) : "",
               matched ? std::to_string(p.matched_counts.after) : "", p.eligible ? "1" : "0"});
      }
    }
    ojson j;
    j["source"] = source;
    j["baseline"] = source == "none" ? ojson(nullptr) : ojson(det.baseline_value);
    j["statistic"] = config.baseline_statistic == BaselineStatistic::Mean ? "mean" : "median";
    j["eligible_pairs"] = det.baseline ? det.baseline->eligible_pairs : 0;
    j["pairs"] = det.baseline ? det.baseline->pairs.size() : 0;
    j["reference"] = kPaperBaseline;
    write_json(out / "baseline.json", j);
  });

  stage("detect", [&] {
    for (std::size_t i = 0; i < det.crosslinks.links.size(); ++i) {
      auto rec = detect(corpus, det.crosslinks.links[i], det.baseline_value, dopt);
      if (det.baseline && !det.baseline->pairs[i].matched_post.empty()) {
        const auto& pair = det.baseline->pairs[i];
        rec.matched_post = pair.matched_post;
        rec.matched_before = pair.matched_counts.before;
        rec.matched_after = pair.matched_counts.after;
      }
      det.records.push_back(std::move(rec));
    }
  });

  std::vector<Lexicon> lexicons;
  bool have_sentiment = false;
  stage("sentiment", [&] {
    lexicons = load_lexicons(config.lexicons);
    TableWriter t(out / "sentiment.csv", header_of("sentiment.csv"));
    if (config.labels.empty()) return;
    const auto labels = load_sentiment_labels(config.labels);
    std::size_t pos = 0, neg = 0;
    for (const auto& l : det.crosslinks.links) {
      const auto it = labels.find(l.source_post);
      if (it == labels.end()) continue;
      (it->second == Sentiment::Negative ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0) {
      log_warn("sentiment: labels cover only one class among the cross-links; sentiment left unlabeled");
      return;
    }
    const std::string key = "sentiment-" +
                            hex(fnv1a64(read_file(config.labels), fnv1a64(to_string(keyed), corpus_hash) ^
                                                                      lexicon_fingerprint(lexicons))) +
                            ".forest";
    const Forest model = cache.get<Forest>(
        key, [](const fs::path& p) { return Forest::load(p); },
        [&] { return train_sentiment_model(corpus, det.crosslinks.links, labels, lexicons, config); },
        [](const Forest& f, const fs::path& p) { f.save(p); });
    have_sentiment = true;
    for (auto& rec : det.records) {
      const auto pred = predict_sentiment(model, rec.crosslink, corpus, lexicons);
      rec.sentiment = pred.label;
      t.row({rec.id(), to_string(pred.label), format_double(pred.probability_negative)});
    }
  });

  stage("detect-report", [&] {
    std::ofstream mob(out / "mobilizations.jsonl", std::ios::binary);
    std::ofstream alerts(out / "alerts.jsonl", std::ios::binary);
    if (!mob || !alerts) throw DataError("cannot write detection outputs");
    for (const auto& rec : det.records) {
      mob << to_json_line(rec) << '\n';
      if (!rec.is_mobilization()) continue;
      ojson a;
      a["type"] = rec.is_negative() ? "negative_mobilization" : "mobilization";
      a["source_post"] = rec.crosslink.source_post;
      a["target_post"] = rec.crosslink.target_post;
      a["source_community"] = rec.crosslink.source_community;
      a["target_community"] = rec.crosslink.target_community;
      a["t0"] = rec.crosslink.t0;
      a["ratio"] = rec.ratio;
      a["baseline"] = rec.baseline;
      a["sentiment"] = to_string(rec.sentiment);
      a["attackers"] = rec.attackers.size();
      a["defenders"] = rec.defenders.size();
      alerts << a.dump() << '\n';
    }
  });

  // Negative mobilizations when sentiment is known, otherwise all mobilizations.
  std::vector<const MobilizationRecord*> conflicts;
  for (const auto& rec : det.records) {
    if (have_sentiment ? rec.is_negative() : rec.is_mobilization()) conflicts.push_back(&rec);
  }

  PageRankOptions pro;
  pro.alpha = config.alpha;
  pro.tol = config.tol;
  const Timestamp conflict_span = ImpactOptions{}.duration;
  std::map<std::string, EchoReport> echo;
  std::map<std::string, std::optional<double>> defender_anger;
  std::size_t replynet_skipped = 0;
  stage("replynet", [&] {
    TableWriter t(out / "replynet.csv", header_of("replynet.csv"));
    TableWriter edges(out / "reply_edges.tsv", header_of("reply_edges.tsv"), '\t');
    const Lexicon* anger = anger_lexicon(lexicons);
    for (const auto* rec : conflicts) {
      const TimeWindow window{rec->crosslink.t0, rec->crosslink.t0 + conflict_span};
      const auto g = build_reply_graph(corpus, rec->crosslink.target_post, rec->attackers, rec->defenders, window);
      if (g.count(Group::Attacker) == 0 || g.count(Group::Defender) == 0) {
        ++replynet_skipped;
        continue;
      }
      const EchoReport r = echo_metrics(g, pro);
      echo[rec->id()] = r;
      std::optional<double> ad, aa, da;
      if (anger) {
        const auto& th = rec->crosslink.target_post;
        ad = anger_rate(corpus, th, g, *anger, Group::Attacker, Group::Defender, window);
        aa = anger_rate(corpus, th, g, *anger, Group::Attacker, Group::Attacker, window);
        da = anger_rate(corpus, th, g, *anger, Group::Defender, Group::Attacker, window);
      }
      defender_anger[rec->id()] = da;
      t.row({rec->id(), std::to_string(g.nodes.size()), std::to_string(g.edges.size()),
             std::to_string(r.attackers), std::to_string(r.defenders),
             format_double(r.attacker_to_attacker), format_double(r.attacker_to_defender),
             format_double(r.defender_to_attacker), format_double(r.defender_to_defender),
             opt(r.attacker_echo_ratio), opt(r.defender_echo_ratio), format_double(r.cross_group_fraction),
             format_double(r.defender_reply_fraction_to_attackers),
             format_double(r.defenders_zero_apr_fraction), format_double(r.defenders_ganged_up_fraction),
             format_double(r.mean_defender_apr), format_double(r.mean_attacker_dpr), opt(ad), opt(aa), opt(da)});
      for (const auto& e : g.edges) {
        edges.row({rec->id(), g.nodes[static_cast<std::size_t>(e.src)], g.nodes[static_cast<std::size_t>(e.dst)],
                   std::to_string(e.weight), to_string(g.groups[static_cast<std::size_t>(e.src)]),
                   to_string(g.groups[static_cast<std::size_t>(e.dst)])});
      }
    }
  });

  std::size_t impact_records = 0;
  std::vector<DefenseOutcome> outcomes;
  stage("impact", [&] {
    TableWriter t(out / "impact.csv", header_of("impact.csv"));
    std::vector<std::pair<double, double>> attacker_pairs, defender_pairs;
    for (const auto* rec : conflicts) {
      const auto impacts = mobilization_impacts(corpus, *rec, derive_seed(config.seed, "impact"));
      impact_records += impacts.size();
      for (const auto& r : impacts) {
        t.row({r.mobilization_id, r.user, to_string(r.role), format_double(r.delta), r.matched_user,
               opt(r.matched_delta), r.low_support ? "1" : "0"});
        if (r.matched_delta) {
          (r.role == Role::Attacker ? attacker_pairs : defender_pairs).emplace_back(r.delta, *r.matched_delta);
        }
      }
      if (std::any_of(impacts.begin(), impacts.end(), [](const ImpactRecord& r) { return r.role == Role::Defender; })) {
        outcomes.push_back(defense_success(rec->id(), impacts));
      }
    }
    assign_deciles(outcomes);
    TableWriter d(out / "defense.csv", header_of("defense.csv"));
    for (const auto& o : outcomes) {
      d.row({o.mobilization_id, format_double(o.success_score), std::to_string(o.decile), std::to_string(o.defenders)});
    }

    const std::vector<std::pair<std::string, OutcomeMetric>> metrics = {
        {"defender_reply_fraction_to_attackers",
         [&](const DefenseOutcome& o) -> std::optional<double> {
           const auto it = echo.find(o.mobilization_id);
           if (it == echo.end()) return std::nullopt;
           return it->second.defender_reply_fraction_to_attackers;
         }},
        {"mean_defender_apr",
         [&](const DefenseOutcome& o) -> std::optional<double> {
           const auto it = echo.find(o.mobilization_id);
           if (it == echo.end()) return std::nullopt;
           return it->second.mean_defender_apr;
         }},
        {"mean_attacker_dpr",
         [&](const DefenseOutcome& o) -> std::optional<double> {
           const auto it = echo.find(o.mobilization_id);
           if (it == echo.end()) return std::nullopt;
           return it->second.mean_attacker_dpr;
         }},
        {"defender_anger_rate",
         [&](const DefenseOutcome& o) -> std::optional<double> {
           const auto it = defender_anger.find(o.mobilization_id);
           if (it == defender_anger.end()) return std::nullopt;
           return it->second;
         }},
    };
    TableWriter s(out / "series.csv", header_of("series.csv"));
    ojson tests;
    tests["extremes"] = ojson::object();
    for (const auto& [name, metric] : metrics) {
      const Series series = decile_series(outcomes, metric);
      for (const auto& p : series.points) {
        s.row({name, format_double(p.x), format_double(p.y), series.smoothed ? "1" : "0"});
      }
      const auto cmp = compare_extremes(outcomes, metric);
      ojson c;
      c["top_n"] = cmp.top_n;
      c["bottom_n"] = cmp.bottom_n;
      c["top_mean"] = cmp.top_mean;
      c["bottom_mean"] = cmp.bottom_mean;
      c["p_value"] = opt_json(cmp.p_value);
      tests["extremes"][name] = c;
    }
    const auto paired = [](const std::vector<std::pair<double, double>>& pairs) {
      ojson j;
      j["n"] = pairs.size();
      try {
        const auto r = stats::wilcoxon_signed_rank(pairs);
        j["statistic"] = r.statistic;
        j["p_value"] = r.p_value;
        j["exact"] = r.exact;
      } catch (const std::invalid_argument&) {
        j["statistic"] = nullptr;
        j["p_value"] = nullptr;
      }
      return j;
    };
    tests["attacker_delta_vs_matched"] = paired(attacker_pairs);
    tests["defender_delta_vs_matched"] = paired(defender_pairs);
    write_json(out / "tests.json", tests);
  });

  ojson prediction;
  prediction["status"] = "disabled";
  {
    TableWriter predictions(out / "predictions.csv", header_of("predictions.csv"));
    if (config.embed) {
      EmbeddingTable social;
      EmbeddingMatrix words;
      const std::string key = hex(fnv1a64(to_string(keyed), corpus_hash));
      stage("embed", [&] {
        EmbedOptions eo;
        eo.dim = config.dim;
        eo.negatives = config.negatives;
        eo.epochs = config.embed_epochs;
        if (!config.embeddings.empty()) {
          social = load_embedding_table(config.embeddings);
        } else {
          eo.seed = derive_seed(config.seed, "embed/social");
          social = cache.get<EmbeddingTable>(
              "embed-" + key + ".txt", [](const fs::path& p) { return load_embedding_table(p); },
              [&] { return train_embeddings(build_bipartite(corpus), eo); },
              [](const EmbeddingTable& t, const fs::path& p) { save_embedding_table(t, p); });
        }
        if (!config.word_vectors.empty()) {
          words = load_embeddings(config.word_vectors);
        } else {
          eo.seed = derive_seed(config.seed, "embed/words");
          words = cache.get<EmbeddingMatrix>(
              "words-" + key + ".txt", [](const fs::path& p) { return load_embeddings(p); },
              [&] { return train_word_vectors(corpus, eo); },
              [](const EmbeddingMatrix& m, const fs::path& p) { save_embeddings(m, p); });
        }
      });

      if (config.predict) {
        stage("predict", [&] {
          PredictionDataset data;
          std::vector<FeatureVector> base;
          const TfidfIndex tfidf = TfidfIndex::build(corpus, config.vocab);
          SequenceOptions so;
          so.back_off_to_mean = true;
          std::size_t backed_off = 0;
          for (const auto& rec : det.records) {
            auto seq = assemble_sequence(rec.crosslink, corpus, social, words, rec.is_mobilization() ? 1 : 0, so);
            backed_off += seq.backed_off;
            data.sequences.push_back(std::move(seq));
            base.push_back(baseline_features(rec.crosslink, corpus, lexicons, tfidf));
          }
          const std::size_t n = data.sequences.size();
          data.split = split_80_10_10(n, derive_seed(config.seed, "predict/split"));
          const auto labels_of = [&](const std::vector<std::size_t>& idx) {
            std::vector<int> y;
            for (std::size_t i : idx) y.push_back(data.sequences[i].label);
            return y;
          };
          const auto both = [](const std::vector<int>& y) {
            return std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
          };
          const auto train_y = labels_of(data.split.train);
          prediction["examples"] = n;
          prediction["backed_off"] = backed_off;
          if (n < 10 || !both(train_y)) {
            prediction["status"] = "skipped";
            prediction["reason"] = "need at least 10 cross-links and both labels in the training split";
            return;
          }

          LstmTrainOptions lo;
          lo.lr = config.lr;
          lo.epochs = config.epochs;
          lo.batch_size = config.batch;
          lo.seed = derive_seed(config.seed, "predict/lstm");
          lo.threads = config.threads;
          const auto init = LstmParams::random(static_cast<Eigen::Index>(social.dim()), config.hidden,
                                               derive_seed(config.seed, "predict/init"));
          const LstmCheckpoint ckpt = cache.get<LstmCheckpoint>(
              "lstm-" + key + ".bin", [](const fs::path& p) { return load_checkpoint(p); },
              [&] {
                const auto trained = train_lstm(data, init, lo);
                return LstmCheckpoint{trained.params, lo.seed, config.epochs, trained.best_epoch,
                                      trained.best_validation_auc.value_or(0.0)};
              },
              [](const LstmCheckpoint& c, const fs::path& p) { save_checkpoint(c, p); });

          std::vector<FeatureVector> ens;
          for (std::size_t i = 0; i < n; ++i) {
            const auto& seq = data.sequences[i];
            const auto col = [&](Eigen::Index c) {
              return std::span<const double>(seq.inputs.col(c).data(), static_cast<std::size_t>(seq.inputs.rows()));
            };
            ens.push_back(ensemble_features(base[i], col(0), col(1), col(2), mean_hidden(seq, ckpt.params)));
          }
          const auto subset = [](const std::vector<FeatureVector>& x, const std::vector<std::size_t>& idx) {
            std::vector<FeatureVector> out;
            for (std::size_t i : idx) out.push_back(x[i]);
            return out;
          };
          ForestOptions fo;
          fo.trees = config.ensemble_trees;
          fo.threads = config.threads;
          fo.seed = derive_seed(config.seed, "predict/baseline");
          const Forest base_model = train_forest(subset(base, data.split.train), train_y, fo);
          fo.seed = derive_seed(config.seed, "predict/ensemble");
          const Forest ens_model = train_forest(subset(ens, data.split.train), train_y, fo);

          std::vector<double> sb(n), sl(n), se(n);
          for (std::size_t i = 0; i < n; ++i) {
            sb[i] = base_model.predict_proba(base[i]);
            sl[i] = predict_prob(data.sequences[i], ckpt.params);
            se[i] = ens_model.predict_proba(ens[i]);
          }
          std::vector<std::string> split_name(n);
          for (std::size_t i : data.split.train) split_name[i] = "train";
          for (std::size_t i : data.split.validation) split_name[i] = "validation";
          for (std::size_t i : data.split.test) split_name[i] = "test";
          for (std::size_t i = 0; i < n; ++i) {
            predictions.row({det.records[i].id(), split_name[i], std::to_string(data.sequences[i].label),
                             format_double(sb[i]), format_double(sl[i]), format_double(se[i])});
          }
          const auto test_y = labels_of(data.split.test);
          const auto test_auc = [&](const std::vector<double>& s) -> ojson {
            if (!both(test_y)) return nullptr;
            std::vector<double> v;
            for (std::size_t i : data.split.test) v.push_back(s[i]);
            return auc(v, test_y);
          };
          prediction["status"] = "complete";
          prediction["train"] = data.split.train.size();
          prediction["validation"] = data.split.validation.size();
          prediction["test"] = data.split.test.size();
          prediction["best_epoch"] = ckpt.best_epoch;
          prediction["auc"] = {{"baseline", test_auc(sb)}, {"lstm", test_auc(sl)}, {"ensemble", test_auc(se)}};
        });
      }
    }

  }

  stage("report", [&] {
    write_json(out / "prediction.json", prediction);
    result.crosslinks = det.records.size();
    result.mobilizations = static_cast<std::size_t>(
        std::count_if(det.records.begin(), det.records.end(), [](const auto& r) { return r.is_mobilization(); }));
    result.negative_mobilizations = static_cast<std::size_t>(
        std::count_if(det.records.begin(), det.records.end(), [](const auto& r) { return r.is_negative(); }));
    result.baseline = det.baseline_value;
    ojson s;
    s["crosslinks"] = result.crosslinks;
    s["mobilizations"] = result.mobilizations;
    s["negative_mobilizations"] = result.negative_mobilizations;
    s["baseline"] = det.baseline_value;
    s["sentiment"] = have_sentiment ? "classified" : "unlabeled";
    s["conflicts_analyzed"] = conflicts.size();
    s["replynet_threads"] = echo.size();
    s["replynet_skipped"] = replynet_skipped;
    s["impact_records"] = impact_records;
    s["defense_outcomes"] = outcomes.size();
    s["crosslink_stats"] = {{"candidates", det.crosslinks.stats.candidates},
                            {"missing_target", det.crosslinks.stats.missing_target},
                            {"community_mismatch", det.crosslinks.stats.community_mismatch},
                            {"host_rejected", det.crosslinks.stats.host_rejected},
                            {"self_links", det.crosslinks.stats.self_links},
                            {"overlap_removed", det.crosslinks.stats.overlap_removed}};
    write_json(out / "summary.json", s);
  });
  write_manifest("complete", "", fingerprint);
  const auto problems = validate_bundle(out);
  if (!problems.empty()) throw StageError("report", "bundle failed validation: " + problems.front(), false);
  return result;
}

}  // namespace intercom
