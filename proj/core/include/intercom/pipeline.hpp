#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "intercom/config.hpp"
#include "intercom/corpus.hpp"
#include "intercom/error.hpp"
#include "intercom/forest.hpp"
#include "intercom/lexicon.hpp"
#include "intercom/mobilization.hpp"

namespace intercom {

// A pipeline stage failed; outputs of earlier stages stay on disk.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, bool data_error)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)), data_error_(data_error) {}
  const std::string& stage() const noexcept { return stage_; }
  // The underlying failure was a DataError (bad input rather than a bug).
  bool data_error() const noexcept { return data_error_; }

 private:
  std::string stage_;
  bool data_error_;
};

// `<dir>` holding *.txt category files is one lexicon; otherwise every
// subdirectory is loaded as a lexicon. An empty path yields none.
std::vector<Lexicon> load_lexicons(const std::filesystem::path& path);

// `<source_post>\t<negative|neutral|1|0>` lines; '#' comments allowed.
std::map<std::string, Sentiment> load_sentiment_labels(const std::filesystem::path& path);

// Cross-links, baseline and verdicts of one corpus.
struct Detection {
  CrosslinkResult crosslinks;
  std::optional<BaselineResult> baseline;  // empty when fixed or without links
  double baseline_value = 0.0;             // 0 when there is nothing to compare
  std::vector<MobilizationRecord> records;  // one per cross-link
};

Detection run_detection(const Corpus& corpus, const Config& config);

// Trains on the labeled cross-links. Throws DataError unless both labels occur.
Forest train_sentiment_model(const Corpus& corpus, const std::vector<CrossLink>& links,
                             const std::map<std::string, Sentiment>& labels,
                             const std::vector<Lexicon>& lexicons, const Config& config);

struct PipelineResult {
  std::filesystem::path bundle;
  std::size_t crosslinks = 0;
  std::size_t mobilizations = 0;
  std::size_t negative_mobilizations = 0;
  double baseline = 0.0;
  std::vector<std::string> stages;      // in execution order
  std::vector<std::string> cache_hits;  // cached artifacts that were reused
};

// ingest -> crosslinks -> baseline -> detect -> sentiment -> replynet ->
// impact -> [embed -> predict] -> report, writing a bundle to config.output.
// Trained models are cached under config.models keyed by a fingerprint of the
// corpus and the settings they depend on. Throws StageError.
PipelineResult run_pipeline(const Config& config);

// Files every bundle contains, with their CSV header or JSON kind.
struct BundleFile {
  std::string name;
  std::string header;  // first line for CSV/TSV files; empty for JSON
};
const std::vector<BundleFile>& bundle_schema();

// Returns the list of problems found (empty when the bundle is valid).
std::vector<std::string> validate_bundle(const std::filesystem::path& dir);

}  // namespace intercom
