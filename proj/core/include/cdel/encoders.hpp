#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cdel/types.hpp"

namespace cdel {

// Desk-scale stand-ins for the pretrained text and image backbones. They exist so
// that gradients flow end to end through the same fusion path.

struct TextEncoderConfig {
  int hash_width = 1024;  // token hashing buckets
  int embed_dim = 16;
  int state_dim = 64;
};

// Single-layer tanh recurrent cell over hashed token embeddings:
//   h_t = tanh(W_in e(tok_t) + W_state h_{t-1} + b),  h_0 = 0.
struct TextEncoderParams {
  TextEncoderConfig config;
  Eigen::MatrixXd embedding;  // embed_dim x hash_width, column per bucket
  Eigen::MatrixXd w_input;    // state_dim x embed_dim
  Eigen::MatrixXd w_state;    // state_dim x state_dim
  Eigen::VectorXd bias;       // state_dim

  static TextEncoderParams initialize(const TextEncoderConfig& config, std::uint64_t seed);
  static TextEncoderParams zeros(const TextEncoderConfig& config);
};

// Whitespace tokens hashed (FNV-1a) into [0, hash_width).
[[nodiscard]] std::vector<int> hash_tokens(std::string_view text, int hash_width);

// Final recurrent state; the zero vector for empty text.
[[nodiscard]] Eigen::VectorXd encode_text_toy(std::string_view text, const TextEncoderParams& params);
[[nodiscard]] Eigen::VectorXd encode_text_toy(std::string_view text, const TextEncoderConfig& config,
                                              std::uint64_t seed);

struct TextTrace {
  std::vector<int> tokens;
  std::vector<Eigen::VectorXd> states;  // states[0] = h_0, states.back() = output
};

[[nodiscard]] TextTrace run_text_encoder(std::span<const int> tokens, const TextEncoderParams& params);

// Accumulates dLoss/dparams into `grads` given dLoss/d(output state).
void backprop_text_encoder(const TextTrace& trace, const TextEncoderParams& params,
                           const Eigen::VectorXd& grad_output, TextEncoderParams& grads);

enum class ImageMode { passthrough, projection };

// y = tanh(W x + b).
struct ImageProjectionParams {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  static ImageProjectionParams initialize(Eigen::Index in, Eigen::Index out, std::uint64_t seed);
  static ImageProjectionParams zeros(Eigen::Index in, Eigen::Index out);
};

[[nodiscard]] Eigen::VectorXd project_image(const Eigen::VectorXd& input, const ImageProjectionParams& params);

void backprop_image_projection(const Eigen::VectorXd& input, const Eigen::VectorXd& output,
                               const ImageProjectionParams& params, const Eigen::VectorXd& grad_output,
                               ImageProjectionParams& grads);

// Stored embedding row for `id`, or zeros when absent and `zero_fallback` is set;
// throws DataError otherwise.
[[nodiscard]] Eigen::VectorXd lookup_embedding(std::string_view id, const EmbeddingMatrix* source,
                                               Eigen::Index dim, bool zero_fallback,
                                               std::string_view what = "embedding");

// Pass-through when `projection` is null, otherwise the trainable projection.
[[nodiscard]] Eigen::VectorXd encode_image_toy(std::string_view id, const EmbeddingMatrix* source,
                                               Eigen::Index dim, bool zero_fallback,
                                               const ImageProjectionParams* projection = nullptr);

// Uniform on +-sqrt(6 / (fan_in + fan_out)).
[[nodiscard]] Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                                             Eigen::Index fan_out, std::uint64_t seed);

}  // namespace cdel
