#include "intercom/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>

#include "intercom/auc.hpp"
#include "intercom/binary_io.hpp"
#include "intercom/embed.hpp"
#include "intercom/error.hpp"
#include "intercom/random.hpp"

namespace intercom {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr const char* kCheckpointMagic = "ICLSTM\0\0";
constexpr std::uint32_t kCheckpointVersion = 1;
// Per-chunk gradients are summed in chunk order, so results do not depend on
// the thread count.
constexpr std::size_t kChunk = 8;

VectorXd logistic(const VectorXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

// -log p(label | z) for p = logistic(z).
double cross_entropy(double z, int label) {
  return label == 1 ? -log_sigmoid(z) : -log_sigmoid(-z);
}

void add_into(LstmParams& acc, const LstmParams& g) {
  acc.W += g.W;
  acc.U += g.U;
  acc.b += g.b;
  acc.theta += g.theta;
}

}  // namespace

LstmParams LstmParams::zeros(Index input, Index hidden) {
  LstmParams p;
  p.W = MatrixXd::Zero(4 * hidden, input);
  p.U = MatrixXd::Zero(4 * hidden, hidden);
  p.b = VectorXd::Zero(4 * hidden);
  p.theta = VectorXd::Zero(hidden);
  return p;
}

LstmParams LstmParams::random(Index input, Index hidden, std::uint64_t seed) {
  LstmParams p = zeros(input, hidden);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto fill = [&](auto& m) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-k, k);
  };
  fill(p.W);
  fill(p.U);
  fill(p.b);
  fill(p.theta);
  p.b.segment(hidden, hidden).setConstant(1.0);
  return p;
}

VectorXd LstmParams::flatten() const {
  VectorXd flat(parameter_count());
  Index o = 0;
  for (const auto* m : {&W, &U}) {
    flat.segment(o, m->size()) = Eigen::Map<const VectorXd>(m->data(), m->size());
    o += m->size();
  }
  flat.segment(o, b.size()) = b;
  o += b.size();
  flat.segment(o, theta.size()) = theta;
  return flat;
}

void LstmParams::assign(const VectorXd& flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("LstmParams::assign: size mismatch");
  Index o = 0;
  for (auto* m : {&W, &U}) {
    Eigen::Map<VectorXd>(m->data(), m->size()) = flat.segment(o, m->size());
    o += m->size();
  }
  b = flat.segment(o, b.size());
  o += b.size();
  theta = flat.segment(o, theta.size());
}

bool LstmParams::all_finite() const {
  return W.allFinite() && U.allFinite() && b.allFinite() && theta.allFinite();
}

LstmTrace lstm_forward(const MatrixXd& x, const LstmParams& p) {
  const Index h = p.hidden_size();
  const Index T = x.cols();
  if (x.rows() != p.input_size()) throw std::invalid_argument("lstm_forward: input size mismatch");
  LstmTrace tr;
  tr.h.resize(h, T);
  tr.c.resize(h, T);
  tr.gates.resize(4 * h, T);
  VectorXd h_prev = VectorXd::Zero(h);
  VectorXd c_prev = VectorXd::Zero(h);
  for (Index t = 0; t < T; ++t) {
    const VectorXd a = p.W * x.col(t) + p.U * h_prev + p.b;
    VectorXd gates(4 * h);
    gates.segment(0, h) = logistic(a.segment(0, h));
    gates.segment(h, h) = logistic(a.segment(h, h));
    gates.segment(2 * h, h) = a.segment(2 * h, h).array().tanh();
    gates.segment(3 * h, h) = logistic(a.segment(3 * h, h));
    const VectorXd c = gates.segment(h, h).cwiseProduct(c_prev) +
                       gates.segment(0, h).cwiseProduct(gates.segment(2 * h, h));
    const VectorXd hn = gates.segment(3 * h, h).cwiseProduct(c.array().tanh().matrix());
    if (!hn.allFinite() || !c.allFinite()) {
      throw Error("lstm_forward: non-finite state at step " + std::to_string(t));
    }
    tr.gates.col(t) = gates;
    tr.c.col(t) = c;
    tr.h.col(t) = hn;
    h_prev = hn;
    c_prev = c;
  }
  return tr;
}

VectorXd mean_hidden(const SocialSequence& seq, const LstmParams& p) {
  if (seq.length() == 0) return VectorXd::Zero(p.hidden_size());
  return lstm_forward(seq.inputs, p).h.rowwise().mean();
}

double predict_prob(const SocialSequence& seq, const LstmParams& p) {
  return sigmoid(p.theta.dot(mean_hidden(seq, p)));
}

double example_loss(const SocialSequence& seq, const LstmParams& p) {
  return cross_entropy(p.theta.dot(mean_hidden(seq, p)), seq.label);
}

LossGradient loss_gradient(const SocialSequence& seq, const LstmParams& p) {
  const Index h = p.hidden_size();
  const Index T = seq.length();
  if (T == 0) throw std::invalid_argument("loss_gradient: empty sequence");
  const LstmTrace tr = lstm_forward(seq.inputs, p);
  const VectorXd hbar = tr.h.rowwise().mean();
  const double z = p.theta.dot(hbar);

  LossGradient out;
  out.loss = cross_entropy(z, seq.label);
  out.grad = LstmParams::zeros(p.input_size(), h);
  const double dz = sigmoid(z) - static_cast<double>(seq.label);
  out.grad.theta = dz * hbar;
  const VectorXd dh_mean = dz * p.theta / static_cast<double>(T);

  VectorXd dh_next = VectorXd::Zero(h);
  VectorXd dc_next = VectorXd::Zero(h);
  for (Index t = T - 1; t >= 0; --t) {
    const auto i = tr.gates.col(t).segment(0, h);
    const auto f = tr.gates.col(t).segment(h, h);
    const auto g = tr.gates.col(t).segment(2 * h, h);
    const auto o = tr.gates.col(t).segment(3 * h, h);
    const VectorXd tanh_c = tr.c.col(t).array().tanh();
    const VectorXd c_prev = t > 0 ? VectorXd(tr.c.col(t - 1)) : VectorXd::Zero(h);
    const VectorXd h_prev = t > 0 ? VectorXd(tr.h.col(t - 1)) : VectorXd::Zero(h);

    const VectorXd dh = dh_mean + dh_next;
    const VectorXd dc =
        dh.cwiseProduct(o).cwiseProduct((1.0 - tanh_c.array().square()).matrix()) + dc_next;

    VectorXd da(4 * h);
    da.segment(0, h) = dc.cwiseProduct(g).cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
    da.segment(h, h) = dc.cwiseProduct(c_prev).cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
    da.segment(2 * h, h) = dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());
    da.segment(3 * h, h) = dh.cwiseProduct(tanh_c).cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));

    out.grad.W.noalias() += da * seq.inputs.col(t).transpose();
    out.grad.U.noalias() += da * h_prev.transpose();
    out.grad.b += da;
    dh_next = p.U.transpose() * da;
    dc_next = dc.cwiseProduct(f);
  }
  return out;
}

double gradient_check(const LstmParams& params, const SocialSequence& example,
                      const GradientFn& analytic, double step) {
  const VectorXd a = analytic(example, params).grad.flatten();
  const VectorXd base = params.flatten();
  LstmParams probe = params;
  double worst = 0.0;
  for (Index k = 0; k < base.size(); ++k) {
    VectorXd v = base;
    v[k] = base[k] + step;
    probe.assign(v);
    const double up = example_loss(example, probe);
    v[k] = base[k] - step;
    probe.assign(v);
    const double down = example_loss(example, probe);
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(a[k]), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(a[k] - numeric) / denom);
  }
  return worst;
}

SplitIndices split_80_10_10(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.validation.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  return s;
}

std::vector<double> score_all(const std::vector<SocialSequence>& seqs,
                              const std::vector<std::size_t>& indices, const LstmParams& params) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(predict_prob(seqs[i], params));
  return out;
}

namespace {

std::optional<double> validation_auc(const PredictionDataset& data, const LstmParams& p) {
  const auto& val = data.split.validation;
  std::vector<int> labels;
  for (std::size_t i : val) labels.push_back(data.sequences[i].label);
  const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
  const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
  if (!has_pos || !has_neg) return std::nullopt;
  return auc(score_all(data.sequences, val, p), labels);
}

double mean_loss(const PredictionDataset& data, const std::vector<std::size_t>& idx, const LstmParams& p) {
  double s = 0.0;
  for (std::size_t i : idx) s += example_loss(data.sequences[i], p);
  return s / static_cast<double>(idx.size());
}

}  // namespace

LstmTrainResult train_lstm(const PredictionDataset& data, LstmParams params,
                           const LstmTrainOptions& opt) {
  const auto& train = data.split.train;
  if (train.empty()) throw DataError("train_lstm: empty training split");
  if (opt.batch_size == 0) throw std::invalid_argument("train_lstm: batch_size must be positive");

  const Index n_params = params.parameter_count();
  VectorXd m = VectorXd::Zero(n_params);
  VectorXd v = VectorXd::Zero(n_params);
  long adam_t = 0;

  const double initial_loss = mean_loss(data, train, params);
  LstmTrainResult result;
  result.params = params;
  double best_loss = initial_loss;

  Rng rng(derive_seed(opt.seed, "lstm/order"));
  std::vector<std::size_t> order = train;
  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      const std::size_t n_chunks = (end - start + kChunk - 1) / kChunk;
      std::vector<LossGradient> chunk(n_chunks);
      auto run_chunk = [&](std::size_t c) {
        LossGradient acc{0.0, LstmParams::zeros(params.input_size(), params.hidden_size())};
        const std::size_t lo = start + c * kChunk;
        const std::size_t hi = std::min(end, lo + kChunk);
        for (std::size_t k = lo; k < hi; ++k) {
          auto g = loss_gradient(data.sequences[order[k]], params);
          acc.loss += g.loss;
          add_into(acc.grad, g.grad);
        }
        chunk[c] = std::move(acc);
      };
      if (opt.threads > 1 && n_chunks > 1) {
        std::vector<std::future<void>> jobs;
        for (std::size_t c = 0; c < n_chunks; ++c) jobs.push_back(std::async(std::launch::async, run_chunk, c));
        for (auto& j : jobs) j.get();
      } else {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
      }
      LossGradient total = std::move(chunk[0]);
      for (std::size_t c = 1; c < n_chunks; ++c) {
        total.loss += chunk[c].loss;
        add_into(total.grad, chunk[c].grad);
      }
      epoch_loss += total.loss;

      const double scale = 1.0 / static_cast<double>(end - start);
      const VectorXd g = total.grad.flatten() * scale;
      ++adam_t;
      m = opt.beta1 * m + (1.0 - opt.beta1) * g;
      v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(adam_t));
      const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(adam_t));
      const VectorXd update =
          (m / c1).array() / ((v / c2).array().sqrt() + opt.epsilon);
      params.assign(params.flatten() - opt.lr * update);
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss) || epoch_loss > opt.divergence_factor * std::max(initial_loss, 1e-12)) {
      throw Error("train_lstm: diverged at epoch " + std::to_string(epoch) + " (loss " +
                  std::to_string(epoch_loss) + ", initial " + std::to_string(initial_loss) + ")");
    }

    EpochLog log{epoch, mean_loss(data, train, params), validation_auc(data, params)};
    result.log.push_back(log);
    if (opt.on_epoch) opt.on_epoch(log);
    const bool better = log.validation_auc
                            ? (!result.best_validation_auc || *log.validation_auc > *result.best_validation_auc)
                            : (!result.best_validation_auc && log.train_loss < best_loss);
    if (better) {
      result.params = params;
      result.best_epoch = epoch;
      result.best_validation_auc = log.validation_auc;
      best_loss = log.train_loss;
    }
  }
  return result;
}

void save_checkpoint(const LstmCheckpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 8);
  BinaryWriter w(out);
  w.write<std::uint32_t>(kCheckpointVersion);
  w.write<std::int64_t>(ckpt.params.input_size());
  w.write<std::int64_t>(ckpt.params.hidden_size());
  w.write<std::uint64_t>(ckpt.seed);
  w.write<std::int32_t>(ckpt.epochs);
  w.write<std::int32_t>(ckpt.best_epoch);
  w.write<double>(ckpt.best_validation_auc);
  const VectorXd flat = ckpt.params.flatten();
  w.write_doubles(std::vector<double>(flat.data(), flat.data() + flat.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

LstmCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  BinaryReader r(in);
  r.expect_magic(std::string(kCheckpointMagic, 8));
  const auto version = r.read<std::uint32_t>();
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
  const auto input = r.read<std::int64_t>();
  const auto hidden = r.read<std::int64_t>();
  if (input <= 0 || hidden <= 0 || input > (1 << 20) || hidden > (1 << 16)) {
    throw DataError("checkpoint: implausible shapes");
  }
  LstmCheckpoint ckpt;
  ckpt.params = LstmParams::zeros(input, hidden);
  ckpt.seed = r.read<std::uint64_t>();
  ckpt.epochs = r.read<std::int32_t>();
  ckpt.best_epoch = r.read<std::int32_t>();
  ckpt.best_validation_auc = r.read<double>();
  const auto flat = r.read_doubles();
  if (static_cast<Index>(flat.size()) != ckpt.params.parameter_count()) {
    throw DataError("checkpoint: parameter count does not match shapes");
  }
  ckpt.params.assign(Eigen::Map<const VectorXd>(flat.data(), static_cast<Index>(flat.size())));
  return ckpt;
}

}  // namespace intercom
