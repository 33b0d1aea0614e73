#include "cdel/encoders.hpp"

#include <cmath>

#include "cdel/errors.hpp"
#include "cdel/random.hpp"

namespace cdel {

Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                               Eigen::Index fan_out, std::uint64_t seed) {
  Rng rng(seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}

// --- text ---

TextEncoderParams TextEncoderParams::initialize(const TextEncoderConfig& config, std::uint64_t seed) {
  if (config.hash_width < 1 || config.embed_dim < 1 || config.state_dim < 1) {
    throw ConfigError("text encoder dimensions must be >= 1");
  }
  TextEncoderParams p;
  p.config = config;
  p.embedding = glorot_uniform(config.embed_dim, config.hash_width, 1, config.embed_dim, derive_seed(seed, 0));
  p.w_input = glorot_uniform(config.state_dim, config.embed_dim, config.embed_dim, config.state_dim,
                             derive_seed(seed, 1));
  p.w_state = glorot_uniform(config.state_dim, config.state_dim, config.state_dim, config.state_dim,
                             derive_seed(seed, 2));
  p.bias = Eigen::VectorXd::Zero(config.state_dim);
  return p;
}

TextEncoderParams TextEncoderParams::zeros(const TextEncoderConfig& config) {
  TextEncoderParams p;
  p.config = config;
  p.embedding = Eigen::MatrixXd::Zero(config.embed_dim, config.hash_width);
  p.w_input = Eigen::MatrixXd::Zero(config.state_dim, config.embed_dim);
  p.w_state = Eigen::MatrixXd::Zero(config.state_dim, config.state_dim);
  p.bias = Eigen::VectorXd::Zero(config.state_dim);
  return p;
}

std::vector<int> hash_tokens(std::string_view text, int hash_width) {
  std::vector<int> out;
  std::size_t i = 0;
  auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    bool any = false;
    while (i < text.size() && !is_space(text[i])) {
      h ^= static_cast<unsigned char>(text[i]);
      h *= 0x100000001b3ULL;
      any = true;
      ++i;
    }
    if (any) out.push_back(static_cast<int>(h % static_cast<std::uint64_t>(hash_width)));
  }
  return out;
}

TextTrace run_text_encoder(std::span<const int> tokens, const TextEncoderParams& p) {
  TextTrace trace;
  trace.tokens.assign(tokens.begin(), tokens.end());
  trace.states.reserve(tokens.size() + 1);
  trace.states.push_back(Eigen::VectorXd::Zero(p.config.state_dim));
  for (int tok : tokens) {
    const Eigen::VectorXd pre = p.w_input * p.embedding.col(tok) + p.w_state * trace.states.back() + p.bias;
    trace.states.push_back(pre.array().tanh().matrix());
  }
  return trace;
}

Eigen::VectorXd encode_text_toy(std::string_view text, const TextEncoderParams& params) {
  const auto tokens = hash_tokens(text, params.config.hash_width);
  return run_text_encoder(tokens, params).states.back();
}

Eigen::VectorXd encode_text_toy(std::string_view text, const TextEncoderConfig& config, std::uint64_t seed) {
  return encode_text_toy(text, TextEncoderParams::initialize(config, seed));
}

void backprop_text_encoder(const TextTrace& trace, const TextEncoderParams& p,
                           const Eigen::VectorXd& grad_output, TextEncoderParams& g) {
  Eigen::VectorXd dh = grad_output;
  for (std::size_t t = trace.tokens.size(); t >= 1; --t) {
    const Eigen::VectorXd& h = trace.states[t];
    const Eigen::VectorXd& h_prev = trace.states[t - 1];
    const int tok = trace.tokens[t - 1];
    const Eigen::VectorXd da = dh.array() * (1.0 - h.array().square());
    g.w_input.noalias() += da * p.embedding.col(tok).transpose();
    g.w_state.noalias() += da * h_prev.transpose();
    g.bias += da;
    g.embedding.col(tok).noalias() += p.w_input.transpose() * da;
    dh = p.w_state.transpose() * da;
  }
}

// --- image ---

ImageProjectionParams ImageProjectionParams::initialize(Eigen::Index in, Eigen::Index out, std::uint64_t seed) {
  if (in < 1 || out < 1) throw ConfigError("image projection dimensions must be >= 1");
  return {glorot_uniform(out, in, in, out, seed), Eigen::VectorXd::Zero(out)};
}

ImageProjectionParams ImageProjectionParams::zeros(Eigen::Index in, Eigen::Index out) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

Eigen::VectorXd project_image(const Eigen::VectorXd& input, const ImageProjectionParams& p) {
  if (input.size() != p.weight.cols()) {
    throw DataError("image projection expects input width " + std::to_string(p.weight.cols()) + ", got " +
                    std::to_string(input.size()));
  }
  return (p.weight * input + p.bias).array().tanh().matrix();
}

void backprop_image_projection(const Eigen::VectorXd& input, const Eigen::VectorXd& output,
                               const ImageProjectionParams&, const Eigen::VectorXd& grad_output,
                               ImageProjectionParams& g) {
  const Eigen::VectorXd da = grad_output.array() * (1.0 - output.array().square());
  g.weight.noalias() += da * input.transpose();
  g.bias += da;
}

Eigen::VectorXd lookup_embedding(std::string_view id, const EmbeddingMatrix* source, Eigen::Index dim,
                                 bool zero_fallback, std::string_view what) {
  if (source) {
    if (source->dim() != dim) {
      throw DataError(std::string(what) + " source has width " + std::to_string(source->dim()) +
                      ", model expects " + std::to_string(dim));
    }
    if (auto row = source->row_of(id)) return source->row(*row);
  }
  if (!zero_fallback) {
    throw DataError("missing " + std::string(what) + " for sample '" + std::string(id) +
                    "' and the zero-vector fallback is disabled");
  }
  return Eigen::VectorXd::Zero(dim);
}

Eigen::VectorXd encode_image_toy(std::string_view id, const EmbeddingMatrix* source, Eigen::Index dim,
                                 bool zero_fallback, const ImageProjectionParams* projection) {
  Eigen::VectorXd stored = lookup_embedding(id, source, dim, zero_fallback, "image embedding");
  if (!projection) return stored;
  return project_image(stored, *projection);
}

}  // namespace cdel
