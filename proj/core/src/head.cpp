#include "cdel/head.hpp"

#include <cmath>

#include "cdel/encoders.hpp"
#include "cdel/errors.hpp"

namespace cdel {
namespace {

Eigen::VectorXd adjusted(const Eigen::VectorXd& logits, const ClassPriors& priors, double tau) {
  if (logits.size() != static_cast<Eigen::Index>(kNumClasses)) {
    throw DataError("logit-adjusted loss expects " + std::to_string(kNumClasses) + " logits, got " +
                    std::to_string(logits.size()));
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double p : priors.values()) {
    if (!(p > 0.0)) throw ConfigError("class priors must be strictly positive");
    top = std::max(top, std::log(p));
  }
  Eigen::VectorXd a = logits;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a(i) += tau * (std::log(priors[static_cast<std::size_t>(i)]) - top);
  }
  return a;
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

std::string_view activation_name(Activation a) noexcept {
  return a == Activation::softmax ? "softmax" : "sigmoid";
}

std::optional<Activation> parse_activation(std::string_view text) noexcept {
  if (text == "softmax") return Activation::softmax;
  if (text == "sigmoid") return Activation::sigmoid;
  return std::nullopt;
}

void ClassifierHead::validate() const {
  if (bias.size() != weight.cols()) throw DataError("classifier head bias does not match its weight columns");
  if (!weight.allFinite() || !bias.allFinite()) throw NumericError("classifier head has non-finite parameters");
  if (activation == Activation::softmax && classes() < 2) {
    throw ConfigError("softmax head needs at least 2 classes");
  }
  if (classes() < 1) throw ConfigError("classifier head needs at least 1 output");
}

ClassifierHead ClassifierHead::initialize(Eigen::Index input_dim, Eigen::Index classes, Activation activation,
                                          std::uint64_t seed) {
  ClassifierHead head{glorot_uniform(input_dim, classes, input_dim, classes, seed),
                      Eigen::VectorXd::Zero(classes), activation};
  head.validate();
  return head;
}

Eigen::VectorXd head_logits(const Eigen::VectorXd& x, const ClassifierHead& head) {
  if (x.size() != head.input_dim()) {
    throw DataError("fused feature has width " + std::to_string(x.size()) + ", head expects " +
                    std::to_string(head.input_dim()));
  }
  return head.weight.transpose() * x + head.bias;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Eigen::VectorXd activate(const Eigen::VectorXd& logits, Activation activation) {
  if (!logits.allFinite()) throw NumericError("non-finite logits");
  if (activation == Activation::softmax) return softmax(logits);
  return logits.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::VectorXd head_forward(const Eigen::VectorXd& fused, const ClassifierHead& head) {
  return activate(head_logits(fused, head), head.activation);
}

Eigen::VectorXd head_forward(const FusedFeature& fused, const ClassifierHead& head) {
  return head_forward(fused.values, head);
}

LossAndGradient cross_entropy_loss(const Eigen::VectorXd& logits, Label label) {
  const auto y = static_cast<Eigen::Index>(index_of(label));
  if (y >= logits.size()) throw DataError("label index outside the logit vector");
  if (!logits.allFinite()) throw NumericError("non-finite logits");
  LossAndGradient out;
  out.loss = log_sum_exp(logits) - logits(y);
  out.gradient = softmax(logits);
  out.gradient(y) -= 1.0;
  return out;
}

LossAndGradient logit_adjusted_loss(const Eigen::VectorXd& logits, Label label, const ClassPriors& priors,
                                    double tau) {
  return cross_entropy_loss(adjusted(logits, priors, tau), label);
}

LossAndGradient logit_adjusted_sigmoid_loss(const Eigen::VectorXd& logits, Label label,
                                            const ClassPriors& priors, double tau) {
  const Eigen::VectorXd a = adjusted(logits, priors, tau);
  if (!a.allFinite()) throw NumericError("non-finite logits");
  const auto y = static_cast<Eigen::Index>(index_of(label));
  LossAndGradient out;
  out.gradient.resize(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double target = i == y ? 1.0 : 0.0;
    // -[t log s(a) + (1-t) log(1 - s(a))]
    out.loss += target > 0.0 ? softplus(-a(i)) : softplus(a(i));
    out.gradient(i) = sigmoid(a(i)) - target;
  }
  return out;
}

Label argmax_label(const Eigen::VectorXd& probabilities) {
  if (probabilities.size() != static_cast<Eigen::Index>(kNumClasses)) {
    throw DataError("expected " + std::to_string(kNumClasses) + " class probabilities");
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probabilities.size(); ++i) {
    if (probabilities(i) > probabilities(best)) best = i;
  }
  return label_at(static_cast<std::size_t>(best));
}

}  // namespace cdel
