#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdel/encoders.hpp"
#include "cdel/fusion.hpp"
#include "cdel/head.hpp"
#include "cdel/types.hpp"

namespace cdel {

// Every trainable tensor of the fused classifier.
struct ModelParameters {
  ClassifierHead head;
  std::optional<TextEncoderParams> text;       // toy text encoder
  std::optional<ImageProjectionParams> image;  // image projection mode

  // Flat views in a fixed order: head W, head b, text (E, W_in, W_state, b), image (W, b).
  [[nodiscard]] std::vector<std::span<double>> tensors();
  [[nodiscard]] std::vector<std::span<const double>> tensors() const;
  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] ModelParameters zeros_like() const;
};

// Per-sample network inputs, resolved once before training or prediction.
struct SampleFeatures {
  std::vector<int> tokens;       // toy text encoder input
  Eigen::VectorXd text;          // precomputed text embedding (when no toy encoder)
  Eigen::VectorXd image;         // stored image embedding (or zeros)
  std::optional<int> cluster;    // one-hot slot; unset for the no-cluster layout
};

struct ForwardTrace {
  TextTrace text;
  Eigen::VectorXd image_out;
  Eigen::VectorXd fused;
  Eigen::VectorXd effective;  // fused after dropout
  Eigen::VectorXd logits;
};

// Unweighted fused vector text | image | one-hot.
[[nodiscard]] FusedFeature fused_features(const ModelParameters& params, const FeatureLayout& layout,
                                          const SampleFeatures& sample, ForwardTrace* trace = nullptr);

// Logits; `dropout_mask` (entries 0 or 1/(1-p)) multiplies the fused vector when given.
[[nodiscard]] Eigen::VectorXd forward_logits(const ModelParameters& params, const FeatureLayout& layout,
                                             const SampleFeatures& sample,
                                             const Eigen::VectorXd* dropout_mask = nullptr,
                                             ForwardTrace* trace = nullptr);

// Training objective of one sample. Adds its parameter gradient to `grads` when non-null.
double sample_loss(const ModelParameters& params, const FeatureLayout& layout, const SampleFeatures& sample,
                   Label label, const ClassPriors& priors, double tau,
                   const Eigen::VectorXd* dropout_mask = nullptr, ModelParameters* grads = nullptr);

}  // namespace cdel
