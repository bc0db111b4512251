#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rankfair {

/// One pairwise training point: query features, a relevant and a
/// non-relevant document with their protected labels (1 = the query-document
/// text carries the protected attribute).
struct AdvDataPoint {
  Eigen::VectorXd query;
  Eigen::VectorXd pos;
  int pos_label = 0;
  Eigen::VectorXd neg;
  int neg_label = 0;
};

/// A single labeled (query, document) example, used by the adversary probe.
struct AdvItem {
  Eigen::VectorXd query;
  Eigen::VectorXd doc;
  int label = 0;
};

struct AdvDims {
  int feature = 0;     // per-side bag-of-words width
  int hidden = 32;     // encoder hidden layer
  int embed = 16;      // interaction embedding z
  int adv_hidden = 16; // adversary hidden layer

  bool operator==(const AdvDims&) const = default;
};

/// Two-layer tanh feedforward with a 2-class softmax output.
struct FeedForwardHead {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 2 x adv_hidden
  Eigen::VectorXd b2;  // 2

  Eigen::Vector2d probabilities(const Eigen::VectorXd& z) const;
};

/// All trainable tensors. Doubles as the gradient container.
struct AdvParams {
  Eigen::MatrixXd enc_w1;  // hidden x 2*feature
  Eigen::VectorXd enc_b1;
  Eigen::MatrixXd enc_w2;  // embed x hidden
  Eigen::VectorXd enc_b2;
  Eigen::VectorXd util_w;  // embed
  double util_b = 0.0;
  FeedForwardHead adv;

  static AdvParams zeros(const AdvDims& dims);
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);
};

/// Pairwise ranker with encoder f, linear relevance head g, adversarial
/// classifier h and a gradient-reversal scale lambda.
struct AdvModel {
  AdvDims dims;
  double grl_lambda = 0.0;
  AdvParams p;

  // Seeded uniform init, scale 1/sqrt(fan_in) per layer.
  static AdvModel init(const AdvDims& dims, double grl_lambda, std::uint64_t seed);

  Eigen::VectorXd encode(const Eigen::VectorXd& query, const Eigen::VectorXd& doc) const;
  double relevance(const Eigen::VectorXd& query, const Eigen::VectorXd& doc) const;
  Eigen::Vector2d adversary_probs(const Eigen::VectorXd& z) const;
};

// Gradient-reversal layer: identity on the forward pass, -lambda times the
// upstream gradient on the backward pass.
Eigen::VectorXd grl_forward(const Eigen::VectorXd& x);
Eigen::VectorXd grl_backward(const Eigen::VectorXd& upstream, double lambda);

struct LossParts {
  double total = 0.0;
  double hinge = 0.0;
  double adversary = 0.0;  // CE of both documents
};

// Mean over the batch of
//   max(0, margin - (s+ - s-)) + CE(h(grl(z+)), l+) + CE(h(grl(z-)), l-).
// Lambda does not change the value (the GRL is the identity forward), only
// the gradients. Throws TrainError on a non-finite result.
LossParts adv_loss(std::span<const AdvDataPoint> batch, const AdvModel& model,
                   double margin);

// Same forward pass plus analytic gradients of the full objective, with the
// adversary's encoder contribution scaled by -lambda through the GRL.
LossParts adv_loss_and_grad(std::span<const AdvDataPoint> batch, const AdvModel& model,
                            double margin, double lambda, AdvParams& grads);

enum class UpdateMask { All, EncoderUtility, AdversaryOnly };

void sgd_step(AdvParams& params, const AdvParams& grads, double learning_rate,
              UpdateMask mask);

// Versioned flat-parameter checkpoint with the attribute-config fingerprint
// it was trained against.
void save_model(const std::filesystem::path& path, const AdvModel& model,
                const std::string& config_fingerprint);

struct LoadedModel {
  AdvModel model;
  std::string config_fingerprint;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace rankfair
