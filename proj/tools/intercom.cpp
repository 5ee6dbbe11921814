// intercom: command-line front end for cross-community conflict analysis.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "intercom/auc.hpp"
#include "intercom/config.hpp"
#include "intercom/corpus.hpp"
#include "intercom/embed.hpp"
#include "intercom/impact.hpp"
#include "intercom/log.hpp"
#include "intercom/lstm.hpp"
#include "intercom/matching.hpp"
#include "intercom/mobilization.hpp"
#include "intercom/pipeline.hpp"
#include "intercom/predictor.hpp"
#include "intercom/random.hpp"
#include "intercom/replynet.hpp"
#include "intercom/sentiment.hpp"
#include "intercom/synth.hpp"
#include "intercom/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace intercom;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Globals {
  std::string config_file;
  std::vector<std::string> settings;
  bool verbose = false;
  bool quiet = false;
};

Config make_config(const Globals& g) {
  Config c = g.config_file.empty() ? Config{} : load_config(g.config_file);
  for (const auto& kv : g.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

// Flag overrides win over the config file and --set.
void override_if(Config& c, const std::string& key, const std::string& value) {
  if (!value.empty()) apply_setting(c, key, value);
}

Corpus load(const fs::path& path) {
  auto r = load_events(path);
  return std::move(r.corpus);
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path);
  return file;
}

const MobilizationRecord& find_record(const Detection& d, const std::string& id) {
  for (const auto& r : d.records) {
    if (r.id() == id) return r;
  }
  throw DataError("no cross-link with source post " + id);
}

struct ModelPaths {
  fs::path lstm, social, words;
  explicit ModelPaths(const fs::path& model)
      : lstm(model), social(model.string() + ".social.txt"), words(model.string() + ".words.txt") {}
};

PredictionDataset prediction_data(const Corpus& corpus, const Detection& det, const EmbeddingTable& social,
                                  const EmbeddingMatrix& words, const Config& config) {
  PredictionDataset data;
  SequenceOptions so;
  so.back_off_to_mean = true;
  for (const auto& rec : det.records) {
    data.sequences.push_back(
        assemble_sequence(rec.crosslink, corpus, social, words, rec.is_mobilization() ? 1 : 0, so));
  }
  data.split = split_80_10_10(data.sequences.size(), derive_seed(config.seed, "predict/split"));
  return data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect and analyze cross-community mobilizations in threaded discussion logs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-c,--config", g.config_file, "key = value configuration file");
  app.add_option("--set", g.settings, "Override one setting (key=value); repeatable");
  app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");
  app.add_flag("-q,--quiet", g.quiet, "Suppress warnings");

  std::string corpus_path, out_path, baseline, hosts, model_path, lexicons, labels, post_id, mob_id;
  std::string seed;

  auto* ingest = app.add_subcommand("ingest", "Load an event log and report load statistics");
  ingest->add_option("corpus", corpus_path, "Event log (JSON lines)")->required();
  std::string index_out;
  ingest->add_option("--index-out", index_out, "Write the canonical event log and stats to this directory");

  auto* crosslinks = app.add_subcommand("crosslinks", "List resolved cross-links as CSV");
  crosslinks->add_option("corpus", corpus_path)->required();
  crosslinks->add_option("--hosts", hosts, "Comma-separated host allowlist");
  crosslinks->add_option("-o,--out", out_path, "Output file (default stdout)");

  auto* detect_cmd = app.add_subcommand("detect", "Classify cross-links as mobilizations (JSON lines)");
  detect_cmd->add_option("corpus", corpus_path)->required();
  detect_cmd->add_option("--baseline", baseline, "auto or a fixed ratio");
  detect_cmd->add_option("-o,--out", out_path);

  auto* match = app.add_subcommand("match", "Show the matched control post of a post");
  match->add_option("corpus", corpus_path)->required();
  match->add_option("--post", post_id)->required();

  auto* sentiment = app.add_subcommand("sentiment", "Train or apply the cross-link sentiment classifier");
  sentiment->require_subcommand(1);
  auto* sent_train = sentiment->add_subcommand("train", "Train on labeled cross-links");
  auto* sent_predict = sentiment->add_subcommand("predict", "Label every cross-link");
  for (auto* s : {sent_train, sent_predict}) {
    s->add_option("corpus", corpus_path)->required();
    s->add_option("--model", model_path, "Forest file")->required();
    s->add_option("--lexicons", lexicons, "Lexicon directory");
  }
  sent_train->add_option("--labels", labels, "source_post<TAB>negative|neutral lines")->required();
  sent_predict->add_option("-o,--out", out_path);

  auto* replynet = app.add_subcommand("replynet", "Reply graph and PageRank metrics of one mobilization");
  replynet->add_option("corpus", corpus_path)->required();
  replynet->add_option("--mobilization", mob_id, "Source post id of the cross-link")->required();
  replynet->add_option("--baseline", baseline);
  replynet->add_option("--edges", out_path, "Write the edge list here");

  auto* impact = app.add_subcommand("impact", "Activity changes of attackers and defenders (CSV)");
  impact->add_option("corpus", corpus_path)->required();
  impact->add_option("--baseline", baseline);
  impact->add_option("-o,--out", out_path);

  auto* embed_cmd = app.add_subcommand("embed", "Train user and community embeddings");
  embed_cmd->add_option("corpus", corpus_path)->required();
  embed_cmd->add_option("-o,--out", out_path, "Embedding file")->required();
  std::string dim, epochs;
  embed_cmd->add_option("--dim", dim);
  embed_cmd->add_option("--epochs", epochs);
  embed_cmd->add_option("--seed", seed);

  auto* predict = app.add_subcommand("predict", "Mobilization prediction with the socially-primed LSTM");
  predict->require_subcommand(1);
  auto* pred_train = predict->add_subcommand("train", "Train embeddings and the LSTM");
  auto* pred_eval = predict->add_subcommand("eval", "Test-split AUC of a trained model");
  auto* pred_score = predict->add_subcommand("score", "Mobilization probability per cross-link");
  for (auto* s : {pred_train, pred_eval, pred_score}) {
    s->add_option("corpus", corpus_path)->required();
    s->add_option("--model", model_path, "Checkpoint path")->required();
    s->add_option("--baseline", baseline);
  }
  pred_score->add_option("-o,--out", out_path);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic event log with planted cross-links");
  SynthSpec spec;
  std::string synth_dir;
  synth->add_option("--out-dir", synth_dir, "Directory for corpus.jsonl, manifest.json, labels.tsv")->required();
  synth->add_option("--communities", spec.communities)->capture_default_str();
  synth->add_option("--regulars", spec.regulars_per_community)->capture_default_str();
  synth->add_option("--mobile", spec.mobile_per_community)->capture_default_str();
  synth->add_option("--posts-per-day", spec.posts_per_day)->capture_default_str();
  synth->add_option("--comments-per-post", spec.comments_per_post)->capture_default_str();
  synth->add_option("--crosslinks", spec.crosslinks)->capture_default_str();
  synth->add_option("--mobilized-fraction", spec.mobilized_fraction)->capture_default_str();
  synth->add_option("--burst-ratio", spec.burst_ratio)->capture_default_str();
  synth->add_option("--quiet-ratio", spec.quiet_ratio)->capture_default_str();
  synth->add_option("--matched-ratio", spec.matched_ratio)->capture_default_str();
  synth->add_option("--negative-fraction", spec.negative_fraction)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();

  auto* report = app.add_subcommand("report", "Run the full pipeline and write a report bundle");
  report->add_option("corpus", corpus_path, "Event log (overrides the config)");
  report->add_option("-o,--out", out_path, "Bundle directory (overrides the config)");
  report->add_option("--baseline", baseline);
  report->add_option("--lexicons", lexicons);
  report->add_option("--labels", labels);
  report->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  set_log_level(g.quiet ? LogLevel::Quiet : g.verbose ? LogLevel::Info : LogLevel::Warn);

  try {
    Config config = make_config(g);
    override_if(config, "baseline", baseline);
    override_if(config, "hosts", hosts);
    override_if(config, "lexicons", lexicons);
    override_if(config, "labels", labels);
    override_if(config, "seed", seed);
    override_if(config, "dim", dim);
    override_if(config, "embed_epochs", epochs);
    validate(config);
    std::ofstream file;

    if (*ingest) {
      auto r = load_events(corpus_path);
      nlohmann::ordered_json j;
      j["lines"] = r.stats.lines;
      j["rejected"] = r.stats.rejected;
      j["duplicate_ids"] = r.stats.duplicate_ids;
      j["orphan_comments"] = r.stats.orphan_comments;
      j["posts"] = r.corpus.posts().size();
      j["comments"] = r.corpus.comments().size();
      j["communities"] = r.corpus.communities().size();
      j["users"] = r.corpus.users().size();
      j["first_errors"] = r.stats.first_errors;
      if (!index_out.empty()) {
        fs::create_directories(index_out);
        std::vector<Event> events = r.corpus.posts();
        events.insert(events.end(), r.corpus.comments().begin(), r.corpus.comments().end());
        std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
          return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
        });
        write_events(events, fs::path(index_out) / "events.jsonl");
        std::ofstream(fs::path(index_out) / "stats.json") << j.dump(2) << '\n';
      }
      std::cout << j.dump(2) << '\n';
    } else if (*crosslinks) {
      const Corpus corpus = load(corpus_path);
      CrosslinkOptions o;
      o.host_allowlist = config.hosts;
      const auto r = extract_crosslinks(corpus, o);
      auto& out = output(out_path, file);
      out << "source_post,target_post,source_community,target_community,t0,author\n";
      for (const auto& l : r.links) {
        out << l.source_post << ',' << l.target_post << ',' << l.source_community << ','
            << l.target_community << ',' << l.t0 << ',' << l.author << '\n';
      }
    } else if (*detect_cmd) {
      const Corpus corpus = load(corpus_path);
      const Detection d = run_detection(corpus, config);
      auto& out = output(out_path, file);
      for (const auto& r : d.records) out << to_json_line(r) << '\n';
      log_info("baseline " + format_double(d.baseline_value));
    } else if (*match) {
      const Corpus corpus = load(corpus_path);
      const auto links = extract_crosslinks(corpus);
      const auto m = matched_post(corpus, links.involved_posts, post_id);
      std::cout << m.subject_id << ' ' << m.match_id << ' ' << m.match_distance << '\n';
    } else if (*sent_train) {
      const Corpus corpus = load(corpus_path);
      const auto lex = load_lexicons(config.lexicons);
      const auto links = extract_crosslinks(corpus);
      const Forest f = train_sentiment_model(corpus, links.links, load_sentiment_labels(config.labels), lex, config);
      f.save(model_path);
      std::cout << "trained " << f.trees().size() << " trees, out-of-bag accuracy "
                << format_double(f.oob_accuracy()) << '\n';
    } else if (*sent_predict) {
      const Corpus corpus = load(corpus_path);
      const auto lex = load_lexicons(config.lexicons);
      const Forest f = Forest::load(model_path);
      auto& out = output(out_path, file);
      out << "source_post,label,probability_negative\n";
      for (const auto& l : extract_crosslinks(corpus).links) {
        const auto p = predict_sentiment(f, l, corpus, lex);
        out << l.source_post << ',' << to_string(p.label) << ',' << format_double(p.probability_negative) << '\n';
      }
    } else if (*replynet) {
      const Corpus corpus = load(corpus_path);
      const Detection d = run_detection(corpus, config);
      const auto& rec = find_record(d, mob_id);
      const auto graph = build_reply_graph(corpus, rec.crosslink.target_post, rec.attackers, rec.defenders,
                                           TimeWindow{rec.crosslink.t0, rec.crosslink.t0 + 3 * kDay});
      if (!out_path.empty()) {
        std::ofstream edges(out_path);
        write_edge_list(graph, edges);
      }
      PageRankOptions pro;
      pro.alpha = config.alpha;
      pro.tol = config.tol;
      const auto r = echo_metrics(graph, pro);
      nlohmann::ordered_json j;
      j["mobilization"] = mob_id;
      j["nodes"] = graph.nodes.size();
      j["edges"] = graph.edges.size();
      j["attackers"] = r.attackers;
      j["defenders"] = r.defenders;
      j["cross_group_fraction"] = r.cross_group_fraction;
      j["defender_reply_fraction_to_attackers"] = r.defender_reply_fraction_to_attackers;
      j["defenders_zero_apr_fraction"] = r.defenders_zero_apr_fraction;
      j["defenders_ganged_up_fraction"] = r.defenders_ganged_up_fraction;
      j["mean_defender_apr"] = r.mean_defender_apr;
      j["mean_attacker_dpr"] = r.mean_attacker_dpr;
      std::cout << j.dump(2) << '\n';
    } else if (*impact) {
      const Corpus corpus = load(corpus_path);
      const Detection d = run_detection(corpus, config);
      auto& out = output(out_path, file);
      out << "mobilization,user,role,delta,matched_user,matched_delta,low_support\n";
      for (const auto& rec : d.records) {
        if (!rec.is_mobilization()) continue;
        for (const auto& r : mobilization_impacts(corpus, rec, derive_seed(config.seed, "impact"))) {
          out << r.mobilization_id << ',' << r.user << ',' << to_string(r.role) << ',' << format_double(r.delta)
              << ',' << r.matched_user << ',' << (r.matched_delta ? format_double(*r.matched_delta) : "") << ','
              << (r.low_support ? 1 : 0) << '\n';
        }
      }
    } else if (*embed_cmd) {
      const Corpus corpus = load(corpus_path);
      EmbedOptions eo;
      eo.dim = config.dim;
      eo.negatives = config.negatives;
      eo.epochs = config.embed_epochs;
      eo.seed = derive_seed(config.seed, "embed/social");
      if (g.verbose) {
        eo.on_epoch = [](int epoch, const EmbeddingTable&) { log_info("embed epoch " + std::to_string(epoch)); };
      }
      save_embedding_table(train_embeddings(build_bipartite(corpus), eo), out_path);
    } else if (*pred_train) {
      const Corpus corpus = load(corpus_path);
      const Detection det = run_detection(corpus, config);
      const ModelPaths paths(model_path);
      EmbedOptions eo;
      eo.dim = config.dim;
      eo.negatives = config.negatives;
      eo.epochs = config.embed_epochs;
      eo.seed = derive_seed(config.seed, "embed/social");
      const EmbeddingTable social = config.embeddings.empty() ? train_embeddings(build_bipartite(corpus), eo)
                                                              : load_embedding_table(config.embeddings);
      eo.seed = derive_seed(config.seed, "embed/words");
      const EmbeddingMatrix words =
          config.word_vectors.empty() ? train_word_vectors(corpus, eo) : load_embeddings(config.word_vectors);
      const auto data = prediction_data(corpus, det, social, words, config);
      LstmTrainOptions lo;
      lo.lr = config.lr;
      lo.epochs = config.epochs;
      lo.batch_size = config.batch;
      lo.seed = derive_seed(config.seed, "predict/lstm");
      lo.threads = config.threads;
      lo.on_epoch = [](const EpochLog& e) {
        log_info("epoch " + std::to_string(e.epoch) + " loss " + format_double(e.train_loss) +
                 (e.validation_auc ? " val_auc " + format_double(*e.validation_auc) : ""));
      };
      const auto trained = train_lstm(
          data, LstmParams::random(static_cast<Eigen::Index>(social.dim()), config.hidden,
                                   derive_seed(config.seed, "predict/init")),
          lo);
      save_checkpoint({trained.params, lo.seed, config.epochs, trained.best_epoch,
                       trained.best_validation_auc.value_or(0.0)},
                      paths.lstm);
      save_embedding_table(social, paths.social);
      save_embeddings(words, paths.words);
      std::cout << "best epoch " << trained.best_epoch << '\n';
    } else if (*pred_eval || *pred_score) {
      const Corpus corpus = load(corpus_path);
      const Detection det = run_detection(corpus, config);
      const ModelPaths paths(model_path);
      const auto ckpt = load_checkpoint(paths.lstm);
      const auto data = prediction_data(corpus, det, load_embedding_table(paths.social),
                                        load_embeddings(paths.words), config);
      if (*pred_eval) {
        std::vector<int> y;
        for (std::size_t i : data.split.test) y.push_back(data.sequences[i].label);
        const double a = auc(score_all(data.sequences, data.split.test, ckpt.params), y);
        std::cout << "test_auc " << format_double(a) << " (n=" << y.size() << ")\n";
      } else {
        auto& out = output(out_path, file);
        out << "source_post,probability\n";
        for (std::size_t i = 0; i < data.sequences.size(); ++i) {
          out << det.records[i].id() << ',' << format_double(predict_prob(data.sequences[i], ckpt.params)) << '\n';
        }
      }
    } else if (*synth) {
      const auto s = generate_corpus(spec);
      fs::create_directories(synth_dir);
      write_events(s.events, fs::path(synth_dir) / "corpus.jsonl");
      std::ofstream(fs::path(synth_dir) / "manifest.json", std::ios::binary) << manifest_json(s.manifest);
      write_sentiment_labels(s.manifest, fs::path(synth_dir) / "labels.tsv");
      std::cout << s.events.size() << " events, " << s.manifest.links.size() << " cross-links, "
                << s.manifest.mobilization_count() << " planted mobilizations\n";
    } else if (*report) {
      override_if(config, "corpus", corpus_path);
      override_if(config, "output", out_path);
      const auto r = run_pipeline(config);
      std::cout << r.bundle.string() << ": " << r.crosslinks << " cross-links, " << r.mobilizations
                << " mobilizations (" << r.negative_mobilizations << " negative), baseline "
                << format_double(r.baseline) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "intercom: " << e.what() << '\n';
    return kUsage;
  } catch (const StageError& e) {
    std::cerr << "intercom: " << e.what() << '\n';
    return e.data_error() ? kData : kInternal;
  } catch (const DataError& e) {
    std::cerr << "intercom: " << e.what() << '\n';
    return kData;
  } catch (const NoMatch& e) {
    std::cerr << "intercom: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "intercom: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "intercom: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
