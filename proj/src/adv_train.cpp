#include "rankfair/adv_train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rankfair/errors.hpp"
#include "rankfair/rng.hpp"

namespace rankfair {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 over seed ^ salt; decouples the per-purpose streams.
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

AdvDims dims_from(std::span<const AdvDataPoint> data, const TrainConfig& cfg) {
  if (data.empty()) throw TrainError("no training data");
  const auto feature = data.front().query.size();
  for (const auto& p : data) {
    if (p.query.size() != feature || p.pos.size() != feature || p.neg.size() != feature) {
      throw TrainError("inconsistent feature dimensions in training data");
    }
  }
  AdvDims dims;
  dims.feature = static_cast<int>(feature);
  dims.hidden = cfg.hidden;
  dims.embed = cfg.embed;
  dims.adv_hidden = cfg.adv_hidden;
  return dims;
}

void validate(const TrainConfig& cfg) {
  if (cfg.checkpoint_count < 1) throw TrainError("checkpoint count must be >= 1");
  if (cfg.epochs < 1) throw TrainError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw TrainError("batch size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw TrainError("learning rate must be > 0");
}

// All points of the minority pair-label class plus an equally sized sample
// of the majority class, drawn without replacement; reshuffled afterwards.
std::vector<std::size_t> balanced_epoch(std::span<const AdvDataPoint> data,
                                        bool balanced, DetRng& rng) {
  std::vector<std::size_t> order;
  if (!balanced) {
    order.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) order[i] = i;
    rng.shuffle(order);
    return order;
  }
  std::vector<std::size_t> ones;
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (pair_label(data[i]) == 1 ? ones : zeros).push_back(i);
  }
  auto& minority = ones.size() <= zeros.size() ? ones : zeros;
  auto& majority = ones.size() <= zeros.size() ? zeros : ones;
  rng.shuffle(majority);
  order = minority;
  order.insert(order.end(), majority.begin(), majority.begin() + minority.size());
  rng.shuffle(order);
  return order;
}

void require_both_classes(std::span<const AdvDataPoint> data) {
  bool has_one = false;
  bool has_zero = false;
  for (const auto& p : data) {
    (pair_label(p) == 1 ? has_one : has_zero) = true;
    if (has_one && has_zero) return;
  }
  throw TrainError("training data has a single protected-label class; the "
                   "adversary cannot be trained");
}

struct EpochRunner {
  std::span<const AdvDataPoint> data;
  const TrainConfig& cfg;
  double lambda;
  UpdateMask mask;
  std::string stage_name;

  // Runs one epoch over `order`, returns the number of optimizer steps.
  // `on_step` fires after each update with the 1-based step counter.
  template <typename OnStep>
  std::size_t run(AdvModel& model, const std::vector<std::size_t>& order,
                  std::size_t step_base, OnStep&& on_step) const {
    std::vector<AdvDataPoint> batch;
    AdvParams grads;
    std::size_t steps = 0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), at + cfg.batch_size);
      batch.clear();
      for (std::size_t k = at; k < end; ++k) batch.push_back(data[order[k]]);
      try {
        adv_loss_and_grad(batch, model, cfg.margin, lambda, grads);
      } catch (const TrainError& e) {
        throw TrainError(stage_name + " step " + std::to_string(step_base + steps + 1) +
                         ": " + e.what());
      }
      sgd_step(model.p, grads, cfg.learning_rate, mask);
      ++steps;
      on_step(step_base + steps);
    }
    return steps;
  }
};

}  // namespace

AdvModel train_utility(std::span<const AdvDataPoint> data, const TrainConfig& cfg) {
  validate(cfg);
  const AdvDims dims = dims_from(data, cfg);
  AdvModel model = AdvModel::init(dims, 0.0, derive_seed(cfg.seed, 1));
  DetRng shuffle_rng(derive_seed(cfg.seed, 2));

  EpochRunner runner{data, cfg, /*lambda=*/0.0, UpdateMask::EncoderUtility, "stage 1"};
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    step += runner.run(model, order, step, [](std::size_t) {});
  }
  return model;
}

std::vector<AdvModel> train(std::span<const AdvDataPoint> data, const TrainConfig& cfg,
                            double grl_lambda, const AdvModel* pretrained) {
  validate(cfg);
  if (grl_lambda < 0.0) throw TrainError("grl lambda must be >= 0");
  require_both_classes(data);
  const AdvDims dims = dims_from(data, cfg);

  AdvModel model = pretrained ? *pretrained : train_utility(data, cfg);
  if (pretrained && !(pretrained->dims == dims)) {
    throw TrainError("pretrained model dimensions do not match the training data");
  }
  model.grl_lambda = grl_lambda;

  // Stage 2: adversary alone on balanced data, encoder and utility frozen.
  {
    DetRng rng(derive_seed(cfg.seed, 3));
    EpochRunner runner{data, cfg, /*lambda=*/0.0, UpdateMask::AdversaryOnly, "stage 2"};
    std::size_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      const auto order = balanced_epoch(data, cfg.balanced_sampling, rng);
      step += runner.run(model, order, step, [](std::size_t) {});
    }
  }

  // Stage 3: joint adversarial training with checkpoints evenly spaced by
  // optimizer step count.
  DetRng rng(derive_seed(cfg.seed, 4));
  std::vector<std::vector<std::size_t>> epoch_orders;
  epoch_orders.reserve(cfg.epochs);
  std::size_t total_steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    epoch_orders.push_back(balanced_epoch(data, cfg.balanced_sampling, rng));
    total_steps += (epoch_orders.back().size() + cfg.batch_size - 1) / cfg.batch_size;
  }
  if (total_steps < static_cast<std::size_t>(cfg.checkpoint_count)) {
    throw TrainError("stage 3 runs " + std::to_string(total_steps) +
                     " optimizer steps, fewer than the " +
                     std::to_string(cfg.checkpoint_count) + " requested checkpoints");
  }

  std::vector<std::size_t> targets;
  targets.reserve(cfg.checkpoint_count);
  for (int k = 1; k <= cfg.checkpoint_count; ++k) {
    targets.push_back(total_steps * static_cast<std::size_t>(k) /
                      static_cast<std::size_t>(cfg.checkpoint_count));
  }

  std::vector<AdvModel> checkpoints;
  checkpoints.reserve(cfg.checkpoint_count);
  std::size_t next_target = 0;
  EpochRunner runner{data, cfg, grl_lambda, UpdateMask::All, "stage 3"};
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    step += runner.run(model, epoch_orders[epoch], step, [&](std::size_t s) {
      while (next_target < targets.size() && s == targets[next_target]) {
        checkpoints.push_back(model);
        ++next_target;
      }
    });
  }
  return checkpoints;
}

double probe_adversary(const AdvModel& model, std::span<const AdvItem> heldout,
                       std::uint64_t seed) {
  if (heldout.size() < 4) throw TrainError("probe needs at least 4 held-out items");

  std::vector<Eigen::VectorXd> embeddings;
  embeddings.reserve(heldout.size());
  for (const auto& item : heldout) {
    embeddings.push_back(model.encode(item.query, item.doc));
  }

  // Stratified 50/50 split.
  DetRng rng(derive_seed(seed, 11));
  std::vector<std::size_t> ones;
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    (heldout[i].label == 1 ? ones : zeros).push_back(i);
  }
  if (ones.empty() || zeros.empty()) {
    throw TrainError("probe held-out set has a single class");
  }
  rng.shuffle(ones);
  rng.shuffle(zeros);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> eval_idx;
  for (std::size_t i = 0; i < ones.size(); ++i) {
    (i < ones.size() / 2 ? train_idx : eval_idx).push_back(ones[i]);
  }
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    (i < zeros.size() / 2 ? train_idx : eval_idx).push_back(zeros[i]);
  }

  // Fresh probe head, trained with plain SGD on the frozen embeddings.
  AdvDims dims = model.dims;
  AdvModel probe_holder = AdvModel::init(dims, 0.0, derive_seed(seed, 12));
  FeedForwardHead& probe = probe_holder.p.adv;

  constexpr int kProbeEpochs = 40;
  constexpr double kProbeLr = 0.2;
  constexpr std::size_t kProbeBatch = 32;
  for (int epoch = 0; epoch < kProbeEpochs; ++epoch) {
    rng.shuffle(train_idx);
    for (std::size_t at = 0; at < train_idx.size(); at += kProbeBatch) {
      const std::size_t end = std::min(train_idx.size(), at + kProbeBatch);
      Eigen::MatrixXd gw1 = Eigen::MatrixXd::Zero(probe.w1.rows(), probe.w1.cols());
      Eigen::VectorXd gb1 = Eigen::VectorXd::Zero(probe.b1.size());
      Eigen::MatrixXd gw2 = Eigen::MatrixXd::Zero(probe.w2.rows(), probe.w2.cols());
      Eigen::VectorXd gb2 = Eigen::VectorXd::Zero(probe.b2.size());
      for (std::size_t k = at; k < end; ++k) {
        const Eigen::VectorXd& z = embeddings[train_idx[k]];
        const int label = heldout[train_idx[k]].label;
        const Eigen::VectorXd u = (probe.w1 * z + probe.b1).array().tanh();
        Eigen::Vector2d logits = probe.w2 * u + probe.b2;
        const double m = logits.maxCoeff();
        const Eigen::Vector2d e = (logits.array() - m).exp();
        Eigen::Vector2d dlogits = e / e.sum();
        dlogits(label) -= 1.0;
        gw2.noalias() += dlogits * u.transpose();
        gb2 += dlogits;
        const Eigen::VectorXd du = probe.w2.transpose() * dlogits;
        const Eigen::VectorXd dpa = du.array() * (1.0 - u.array().square());
        gw1.noalias() += dpa * z.transpose();
        gb1 += dpa;
      }
      const double inv = 1.0 / static_cast<double>(end - at);
      probe.w1 -= kProbeLr * inv * gw1;
      probe.b1 -= kProbeLr * inv * gb1;
      probe.w2 -= kProbeLr * inv * gw2;
      probe.b2 -= kProbeLr * inv * gb2;
    }
  }

  std::size_t correct = 0;
  for (std::size_t i : eval_idx) {
    const Eigen::Vector2d probs = probe.probabilities(embeddings[i]);
    const int predicted = probs(1) > probs(0) ? 1 : 0;
    if (predicted == heldout[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval_idx.size());
}

}  // namespace rankfair
