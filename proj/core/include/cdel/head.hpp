#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "cdel/fusion.hpp"
#include "cdel/types.hpp"

namespace cdel {

enum class Activation { softmax, sigmoid };

[[nodiscard]] std::string_view activation_name(Activation a) noexcept;
[[nodiscard]] std::optional<Activation> parse_activation(std::string_view text) noexcept;

// Dense layer z = W^T x + b followed by the activation.
struct ClassifierHead {
  Eigen::MatrixXd weight;  // input_dim x classes
  Eigen::VectorXd bias;    // classes
  Activation activation = Activation::softmax;

  [[nodiscard]] Eigen::Index input_dim() const noexcept { return weight.rows(); }
  [[nodiscard]] Eigen::Index classes() const noexcept { return weight.cols(); }

  // Throws unless shapes agree, parameters are finite and the class count suits the activation.
  void validate() const;

  static ClassifierHead initialize(Eigen::Index input_dim, Eigen::Index classes, Activation activation,
                                   std::uint64_t seed);
};

[[nodiscard]] Eigen::VectorXd head_logits(const Eigen::VectorXd& x, const ClassifierHead& head);

// Softmax with max-logit subtraction.
[[nodiscard]] Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
[[nodiscard]] double sigmoid(double t) noexcept;
[[nodiscard]] Eigen::VectorXd activate(const Eigen::VectorXd& logits, Activation activation);

// Probabilities; NumericError on non-finite logits.
[[nodiscard]] Eigen::VectorXd head_forward(const Eigen::VectorXd& fused, const ClassifierHead& head);
[[nodiscard]] Eigen::VectorXd head_forward(const FusedFeature& fused, const ClassifierHead& head);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // dloss/dlogits
};

[[nodiscard]] LossAndGradient cross_entropy_loss(const Eigen::VectorXd& logits, Label label);

// Cross-entropy of softmax(z + tau * log prior). The offset is taken relative to
// the largest prior, which leaves the loss unchanged and makes uniform priors
// an exact no-op.
[[nodiscard]] LossAndGradient logit_adjusted_loss(const Eigen::VectorXd& logits, Label label,
                                                  const ClassPriors& priors, double tau);

// One-vs-rest binary cross-entropy on the same adjusted logits, for sigmoid heads.
[[nodiscard]] LossAndGradient logit_adjusted_sigmoid_loss(const Eigen::VectorXd& logits, Label label,
                                                          const ClassPriors& priors, double tau);

// First maximum in class order negative < neutral < positive.
[[nodiscard]] Label argmax_label(const Eigen::VectorXd& probabilities);

}  // namespace cdel
