#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace intercom {

// One input sequence: column t is x_t. Label is 0/1.
struct SocialSequence {
  Eigen::MatrixXd inputs;
  int label = 0;
  bool backed_off = false;  // a missing user/community vector was replaced by the mean

  Eigen::Index length() const { return inputs.cols(); }
};

// Canonical LSTM cell without peepholes. Gate rows are stacked as
// [input; forget; candidate; output], each `hidden` rows tall.
struct LstmParams {
  Eigen::MatrixXd W;      // 4h x input
  Eigen::MatrixXd U;      // 4h x h
  Eigen::VectorXd b;      // 4h
  Eigen::VectorXd theta;  // h, output weights

  Eigen::Index input_size() const { return W.cols(); }
  Eigen::Index hidden_size() const { return U.cols(); }
  Eigen::Index parameter_count() const { return W.size() + U.size() + b.size() + theta.size(); }

  static LstmParams zeros(Eigen::Index input, Eigen::Index hidden);
  // Weights, biases and theta uniform in +-1/sqrt(h); forget-gate bias 1.0.
  static LstmParams random(Eigen::Index input, Eigen::Index hidden, std::uint64_t seed);

  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

struct LstmTrace {
  Eigen::MatrixXd h;  // hidden states, column t is h_{t+1}
  Eigen::MatrixXd c;  // cell states
  Eigen::MatrixXd gates;  // activated gates, 4h x T
};

// h_0 = c_0 = 0. Throws Error naming the step if a non-finite value appears.
LstmTrace lstm_forward(const Eigen::MatrixXd& inputs, const LstmParams& params);

// logistic(theta . mean_t h_t)
double predict_prob(const SocialSequence& seq, const LstmParams& params);
Eigen::VectorXd mean_hidden(const SocialSequence& seq, const LstmParams& params);

// Cross-entropy of one example.
double example_loss(const SocialSequence& seq, const LstmParams& params);

struct LossGradient {
  double loss = 0.0;
  LstmParams grad;
};

// Full backpropagation through time.
LossGradient loss_gradient(const SocialSequence& seq, const LstmParams& params);

using GradientFn = std::function<LossGradient(const SocialSequence&, const LstmParams&)>;

// Largest per-parameter |analytic - numeric| / max(|analytic|, |numeric|, 1e-3)
// against central differences with the given step.
double gradient_check(const LstmParams& params, const SocialSequence& example,
                      const GradientFn& analytic = loss_gradient, double step = 1e-5);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded shuffle into 80/10/10.
SplitIndices split_80_10_10(std::size_t n, std::uint64_t seed);

struct PredictionDataset {
  std::vector<SocialSequence> sequences;
  SplitIndices split;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> validation_auc;
};

struct LstmTrainOptions {
  double lr = 0.01;  // Adam step size
  int epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int threads = 1;
  double divergence_factor = 10.0;
  std::function<void(const EpochLog&)> on_epoch;
};

struct LstmTrainResult {
  LstmParams params;  // best-validation-AUC checkpoint (lowest train loss without validation)
  std::vector<EpochLog> log;
  int best_epoch = 0;
  std::optional<double> best_validation_auc;
};

// Adam on mean cross-entropy over mini-batches. Throws DataError for an
// empty training split and Error when the loss exceeds divergence_factor
// times the initial loss.
LstmTrainResult train_lstm(const PredictionDataset& data, LstmParams init,
                           const LstmTrainOptions& options = {});

std::vector<double> score_all(const std::vector<SocialSequence>& seqs,
                              const std::vector<std::size_t>& indices, const LstmParams& params);

struct LstmCheckpoint {
  LstmParams params;
  std::uint64_t seed = 0;
  int epochs = 0;
  int best_epoch = 0;
  double best_validation_auc = 0.0;
};

void save_checkpoint(const LstmCheckpoint& ckpt, const std::filesystem::path& path);
LstmCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace intercom
