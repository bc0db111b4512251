#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rankfair/adv_model.hpp"

namespace rankfair {

struct TrainConfig {
  std::vector<double> lambda_grid{0.0, 0.5};
  int checkpoint_count = 20;
  int epochs = 2;  // per stage
  double learning_rate = 0.1;
  double margin = 1.0;
  bool balanced_sampling = true;
  std::uint64_t seed = 7;
  int batch_size = 32;
  int hidden = 32;
  int embed = 16;
  int adv_hidden = 16;
};

// Stage 1: hinge-only training of the encoder and utility head. The
// adversary head keeps its random init and lambda plays no role.
AdvModel train_utility(std::span<const AdvDataPoint> data, const TrainConfig& cfg);

// Full staged procedure: (1) utility-only training, or the supplied
// pretrained model; (2) encoder and utility head frozen, adversary trained
// on balanced resampled data; (3) joint training through the GRL on balanced
// data, emitting cfg.checkpoint_count evenly spaced (by optimizer step)
// snapshots of stage 3. Deterministic given cfg.seed. Throws TrainError when
// the pair labels are single-class or a loss turns non-finite.
std::vector<AdvModel> train(std::span<const AdvDataPoint> data, const TrainConfig& cfg,
                            double grl_lambda, const AdvModel* pretrained = nullptr);

// Accuracy of a freshly trained probe (same architecture as the adversary
// head) on the model's frozen embeddings: half of `heldout` trains the
// probe, the stratified other half is scored. `heldout` should be
// label-balanced for a chance level of 0.5.
double probe_adversary(const AdvModel& model, std::span<const AdvItem> heldout,
                       std::uint64_t seed);

// Pair-level protected label used for balancing: 1 when either document of
// the pair carries the attribute.
inline int pair_label(const AdvDataPoint& p) {
  return (p.pos_label == 1 || p.neg_label == 1) ? 1 : 0;
}

}  // namespace rankfair
