#include "rankfair/adv_model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rankfair/errors.hpp"
#include "rankfair/rng.hpp"

namespace rankfair {

namespace {

void fill_uniform(Eigen::MatrixXd& m, double scale, DetRng& rng) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = rng.uniform(-scale, scale);
    }
  }
}

void fill_uniform(Eigen::VectorXd& v, double scale, DetRng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-scale, scale);
}

void append(std::vector<double>& out, const Eigen::MatrixXd& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

void append(std::vector<double>& out, const Eigen::VectorXd& v) {
  out.insert(out.end(), v.data(), v.data() + v.size());
}

std::size_t take(std::span<const double> values, std::size_t at, Eigen::MatrixXd& m) {
  std::copy(values.begin() + at, values.begin() + at + m.size(), m.data());
  return at + m.size();
}

std::size_t take(std::span<const double> values, std::size_t at, Eigen::VectorXd& v) {
  std::copy(values.begin() + at, values.begin() + at + v.size(), v.data());
  return at + v.size();
}

struct DocForward {
  Eigen::VectorXd x;   // [query; doc]
  Eigen::VectorXd a1;  // tanh of encoder layer 1
  Eigen::VectorXd z;   // interaction embedding
  double s = 0.0;      // relevance score
  Eigen::VectorXd u;   // tanh of adversary layer 1
  Eigen::Vector2d log_probs;
  double ce = 0.0;
};

DocForward forward_doc(const AdvModel& model, const Eigen::VectorXd& query,
                       const Eigen::VectorXd& doc, int label) {
  DocForward f;
  f.x.resize(query.size() + doc.size());
  f.x << query, doc;
  f.a1 = (model.p.enc_w1 * f.x + model.p.enc_b1).array().tanh();
  f.z = (model.p.enc_w2 * f.a1 + model.p.enc_b2).array().tanh();
  f.s = model.p.util_w.dot(f.z) + model.p.util_b;

  const Eigen::VectorXd zr = grl_forward(f.z);
  f.u = (model.p.adv.w1 * zr + model.p.adv.b1).array().tanh();
  Eigen::Vector2d logits = model.p.adv.w2 * f.u + model.p.adv.b2;
  const double m = logits.maxCoeff();
  const double log_z = m + std::log(std::exp(logits(0) - m) + std::exp(logits(1) - m));
  f.log_probs = logits.array() - log_z;
  f.ce = -f.log_probs(label);
  return f;
}

// Backward through the adversary head into dz (scaled by -lambda through the
// GRL) and into the head's own gradients.
void backward_adversary(const AdvModel& model, const DocForward& f, int label,
                        double lambda, AdvParams& grads, Eigen::VectorXd& dz) {
  Eigen::Vector2d dlogits = f.log_probs.array().exp();
  dlogits(label) -= 1.0;

  grads.adv.w2.noalias() += dlogits * f.u.transpose();
  grads.adv.b2 += dlogits;
  const Eigen::VectorXd du = model.p.adv.w2.transpose() * dlogits;
  const Eigen::VectorXd dpa = du.array() * (1.0 - f.u.array().square());
  grads.adv.w1.noalias() += dpa * f.z.transpose();
  grads.adv.b1 += dpa;
  const Eigen::VectorXd dzr = model.p.adv.w1.transpose() * dpa;
  dz += grl_backward(dzr, lambda);
}

void backward_encoder(const AdvModel& model, const DocForward& f,
                      const Eigen::VectorXd& dz, AdvParams& grads) {
  const Eigen::VectorXd dp2 = dz.array() * (1.0 - f.z.array().square());
  grads.enc_w2.noalias() += dp2 * f.a1.transpose();
  grads.enc_b2 += dp2;
  const Eigen::VectorXd da1 = model.p.enc_w2.transpose() * dp2;
  const Eigen::VectorXd dp1 = da1.array() * (1.0 - f.a1.array().square());
  grads.enc_w1.noalias() += dp1 * f.x.transpose();
  grads.enc_b1 += dp1;
}

LossParts run_batch(std::span<const AdvDataPoint> batch, const AdvModel& model,
                    double margin, double lambda, AdvParams* grads) {
  if (batch.empty()) throw ValidationError("empty training batch");
  LossParts parts;
  for (const auto& point : batch) {
    const DocForward pos = forward_doc(model, point.query, point.pos, point.pos_label);
    const DocForward neg = forward_doc(model, point.query, point.neg, point.neg_label);

    const double slack = margin - (pos.s - neg.s);
    const double hinge = slack > 0.0 ? slack : 0.0;
    parts.hinge += hinge;
    parts.adversary += pos.ce + neg.ce;

    if (grads) {
      Eigen::VectorXd dz_pos = Eigen::VectorXd::Zero(model.dims.embed);
      Eigen::VectorXd dz_neg = Eigen::VectorXd::Zero(model.dims.embed);
      if (slack > 0.0) {
        // d hinge/ds+ = -1 and d hinge/ds- = +1; their util_b parts cancel.
        grads->util_w.noalias() += neg.z - pos.z;
        dz_pos -= model.p.util_w;
        dz_neg += model.p.util_w;
      }
      backward_adversary(model, pos, point.pos_label, lambda, *grads, dz_pos);
      backward_adversary(model, neg, point.neg_label, lambda, *grads, dz_neg);
      backward_encoder(model, pos, dz_pos, *grads);
      backward_encoder(model, neg, dz_neg, *grads);
    }
  }
  const double n = static_cast<double>(batch.size());
  parts.hinge /= n;
  parts.adversary /= n;
  parts.total = parts.hinge + parts.adversary;
  if (grads) {
    const double inv = 1.0 / n;
    grads->enc_w1 *= inv;
    grads->enc_b1 *= inv;
    grads->enc_w2 *= inv;
    grads->enc_b2 *= inv;
    grads->util_w *= inv;
    grads->util_b *= inv;
    grads->adv.w1 *= inv;
    grads->adv.b1 *= inv;
    grads->adv.w2 *= inv;
    grads->adv.b2 *= inv;
  }
  if (!std::isfinite(parts.total)) {
    throw TrainError("non-finite loss");
  }
  return parts;
}

}  // namespace

Eigen::Vector2d FeedForwardHead::probabilities(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd u = (w1 * z + b1).array().tanh();
  Eigen::Vector2d logits = w2 * u + b2;
  const double m = logits.maxCoeff();
  const Eigen::Vector2d e = (logits.array() - m).exp();
  return e / e.sum();
}

AdvParams AdvParams::zeros(const AdvDims& dims) {
  AdvParams p;
  p.enc_w1 = Eigen::MatrixXd::Zero(dims.hidden, 2 * dims.feature);
  p.enc_b1 = Eigen::VectorXd::Zero(dims.hidden);
  p.enc_w2 = Eigen::MatrixXd::Zero(dims.embed, dims.hidden);
  p.enc_b2 = Eigen::VectorXd::Zero(dims.embed);
  p.util_w = Eigen::VectorXd::Zero(dims.embed);
  p.util_b = 0.0;
  p.adv.w1 = Eigen::MatrixXd::Zero(dims.adv_hidden, dims.embed);
  p.adv.b1 = Eigen::VectorXd::Zero(dims.adv_hidden);
  p.adv.w2 = Eigen::MatrixXd::Zero(2, dims.adv_hidden);
  p.adv.b2 = Eigen::VectorXd::Zero(2);
  return p;
}

std::size_t AdvParams::parameter_count() const {
  return static_cast<std::size_t>(enc_w1.size() + enc_b1.size() + enc_w2.size() +
                                  enc_b2.size() + util_w.size() + 1 + adv.w1.size() +
                                  adv.b1.size() + adv.w2.size() + adv.b2.size());
}

std::vector<double> AdvParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  append(out, enc_w1);
  append(out, enc_b1);
  append(out, enc_w2);
  append(out, enc_b2);
  append(out, util_w);
  out.push_back(util_b);
  append(out, adv.w1);
  append(out, adv.b1);
  append(out, adv.w2);
  append(out, adv.b2);
  return out;
}

void AdvParams::unflatten(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw ValidationError("parameter vector has wrong length");
  }
  std::size_t at = 0;
  at = take(values, at, enc_w1);
  at = take(values, at, enc_b1);
  at = take(values, at, enc_w2);
  at = take(values, at, enc_b2);
  at = take(values, at, util_w);
  util_b = values[at++];
  at = take(values, at, adv.w1);
  at = take(values, at, adv.b1);
  at = take(values, at, adv.w2);
  take(values, at, adv.b2);
}

AdvModel AdvModel::init(const AdvDims& dims, double grl_lambda, std::uint64_t seed) {
  if (dims.feature < 1 || dims.hidden < 1 || dims.embed < 1 || dims.adv_hidden < 1) {
    throw ValidationError("model dimensions must be positive");
  }
  if (grl_lambda < 0.0) throw ValidationError("grl lambda must be >= 0");
  AdvModel model;
  model.dims = dims;
  model.grl_lambda = grl_lambda;
  model.p = AdvParams::zeros(dims);
  DetRng rng(seed);
  fill_uniform(model.p.enc_w1, 1.0 / std::sqrt(2.0 * dims.feature), rng);
  fill_uniform(model.p.enc_b1, 0.05, rng);
  fill_uniform(model.p.enc_w2, 1.0 / std::sqrt(static_cast<double>(dims.hidden)), rng);
  fill_uniform(model.p.enc_b2, 0.05, rng);
  fill_uniform(model.p.util_w, 1.0 / std::sqrt(static_cast<double>(dims.embed)), rng);
  model.p.util_b = rng.uniform(-0.05, 0.05);
  fill_uniform(model.p.adv.w1, 1.0 / std::sqrt(static_cast<double>(dims.embed)), rng);
  fill_uniform(model.p.adv.b1, 0.05, rng);
  fill_uniform(model.p.adv.w2, 1.0 / std::sqrt(static_cast<double>(dims.adv_hidden)), rng);
  fill_uniform(model.p.adv.b2, 0.05, rng);
  return model;
}

Eigen::VectorXd AdvModel::encode(const Eigen::VectorXd& query,
                                 const Eigen::VectorXd& doc) const {
  Eigen::VectorXd x(query.size() + doc.size());
  x << query, doc;
  const Eigen::VectorXd a1 = (p.enc_w1 * x + p.enc_b1).array().tanh();
  return (p.enc_w2 * a1 + p.enc_b2).array().tanh();
}

double AdvModel::relevance(const Eigen::VectorXd& query,
                           const Eigen::VectorXd& doc) const {
  return p.util_w.dot(encode(query, doc)) + p.util_b;
}

Eigen::Vector2d AdvModel::adversary_probs(const Eigen::VectorXd& z) const {
  return p.adv.probabilities(grl_forward(z));
}

Eigen::VectorXd grl_forward(const Eigen::VectorXd& x) { return x; }

Eigen::VectorXd grl_backward(const Eigen::VectorXd& upstream, double lambda) {
  return (-lambda) * upstream;
}

LossParts adv_loss(std::span<const AdvDataPoint> batch, const AdvModel& model,
                   double margin) {
  return run_batch(batch, model, margin, model.grl_lambda, nullptr);
}

LossParts adv_loss_and_grad(std::span<const AdvDataPoint> batch, const AdvModel& model,
                            double margin, double lambda, AdvParams& grads) {
  grads = AdvParams::zeros(model.dims);
  return run_batch(batch, model, margin, lambda, &grads);
}

void sgd_step(AdvParams& params, const AdvParams& grads, double learning_rate,
              UpdateMask mask) {
  const double lr = learning_rate;
  if (mask != UpdateMask::AdversaryOnly) {
    params.enc_w1 -= lr * grads.enc_w1;
    params.enc_b1 -= lr * grads.enc_b1;
    params.enc_w2 -= lr * grads.enc_w2;
    params.enc_b2 -= lr * grads.enc_b2;
    params.util_w -= lr * grads.util_w;
    params.util_b -= lr * grads.util_b;
  }
  if (mask != UpdateMask::EncoderUtility) {
    params.adv.w1 -= lr * grads.adv.w1;
    params.adv.b1 -= lr * grads.adv.b1;
    params.adv.w2 -= lr * grads.adv.w2;
    params.adv.b2 -= lr * grads.adv.b2;
  }
}

namespace {

nlohmann::json tensor_json(const Eigen::MatrixXd& m) {
  return nlohmann::json(std::vector<double>(m.data(), m.data() + m.size()));
}

nlohmann::json tensor_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

void tensor_from(const nlohmann::json& j, Eigen::MatrixXd& m) {
  auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != m.size()) {
    throw ValidationError("checkpoint tensor has wrong size");
  }
  std::copy(values.begin(), values.end(), m.data());
}

void tensor_from(const nlohmann::json& j, Eigen::VectorXd& v) {
  auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != v.size()) {
    throw ValidationError("checkpoint tensor has wrong size");
  }
  std::copy(values.begin(), values.end(), v.data());
}

}  // namespace

void save_model(const std::filesystem::path& path, const AdvModel& model,
                const std::string& config_fingerprint) {
  nlohmann::json j;
  j["format"] = "rankfair-advmodel";
  j["format_version"] = 1;
  j["config_fingerprint"] = config_fingerprint;
  j["dims"] = {{"feature", model.dims.feature},
               {"hidden", model.dims.hidden},
               {"embed", model.dims.embed},
               {"adv_hidden", model.dims.adv_hidden}};
  j["grl_lambda"] = model.grl_lambda;
  j["params"] = {{"enc_w1", tensor_json(model.p.enc_w1)},
                 {"enc_b1", tensor_json(model.p.enc_b1)},
                 {"enc_w2", tensor_json(model.p.enc_w2)},
                 {"enc_b2", tensor_json(model.p.enc_b2)},
                 {"util_w", tensor_json(model.p.util_w)},
                 {"util_b", model.p.util_b},
                 {"adv_w1", tensor_json(model.p.adv.w1)},
                 {"adv_b1", tensor_json(model.p.adv.b1)},
                 {"adv_w2", tensor_json(model.p.adv.w2)},
                 {"adv_b2", tensor_json(model.p.adv.b2)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "rankfair-advmodel") {
      throw ValidationError("not a model checkpoint: " + path.string());
    }
    LoadedModel loaded;
    loaded.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    AdvDims dims;
    dims.feature = j.at("dims").at("feature").get<int>();
    dims.hidden = j.at("dims").at("hidden").get<int>();
    dims.embed = j.at("dims").at("embed").get<int>();
    dims.adv_hidden = j.at("dims").at("adv_hidden").get<int>();
    loaded.model.dims = dims;
    loaded.model.grl_lambda = j.at("grl_lambda").get<double>();
    loaded.model.p = AdvParams::zeros(dims);
    const auto& params = j.at("params");
    tensor_from(params.at("enc_w1"), loaded.model.p.enc_w1);
    tensor_from(params.at("enc_b1"), loaded.model.p.enc_b1);
    tensor_from(params.at("enc_w2"), loaded.model.p.enc_w2);
    tensor_from(params.at("enc_b2"), loaded.model.p.enc_b2);
    tensor_from(params.at("util_w"), loaded.model.p.util_w);
    loaded.model.p.util_b = params.at("util_b").get<double>();
    tensor_from(params.at("adv_w1"), loaded.model.p.adv.w1);
    tensor_from(params.at("adv_b1"), loaded.model.p.adv.b1);
    tensor_from(params.at("adv_w2"), loaded.model.p.adv.w2);
    tensor_from(params.at("adv_b2"), loaded.model.p.adv.b2);
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace rankfair
