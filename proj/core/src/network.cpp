#include "cdel/network.hpp"

#include "cdel/errors.hpp"

namespace cdel {
namespace {

std::span<double> view(Eigen::MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void require_width(const Eigen::VectorXd& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw DataError(std::string(what) + " has width " + std::to_string(v.size()) + ", layout expects " +
                    std::to_string(expected));
  }
}

}  // namespace

// --- one-hot and fusion ---

OneHotEncoding::OneHotEncoding(int hot, int size) : hot_(hot), size_(size) {
  if (size < 1 || hot < 0 || hot >= size) {
    throw DataError("one-hot index " + std::to_string(hot) + " outside [0, " + std::to_string(size) + ")");
  }
}

Eigen::VectorXd OneHotEncoding::dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size_);
  v(hot_) = 1.0;
  return v;
}

OneHotEncoding one_hot_encode(int cluster_id, int total_clusters) { return {cluster_id, total_clusters}; }

FusedFeature fuse_features(const Eigen::VectorXd& text, const Eigen::VectorXd& image,
                           const OneHotEncoding* onehot, const FeatureLayout& layout) {
  require_width(text, layout.text_dim, "text segment");
  require_width(image, layout.image_dim, "image segment");
  const Eigen::Index cluster_width = onehot ? onehot->size() : 0;
  if (cluster_width != layout.cluster_dim) {
    throw DataError("cluster segment has width " + std::to_string(cluster_width) + ", layout expects " +
                    std::to_string(layout.cluster_dim));
  }
  FusedFeature out;
  out.layout = layout;
  out.values = Eigen::VectorXd::Zero(layout.total());
  out.values.segment(0, layout.text_dim) = text;
  out.values.segment(layout.image_offset(), layout.image_dim) = image;
  if (onehot) out.values(layout.cluster_offset() + onehot->hot()) = 1.0;
  return out;
}

FusedFeature fuse_features(const Eigen::VectorXd& text, const Eigen::VectorXd& image,
                           const OneHotEncoding& onehot, const FeatureLayout& layout) {
  return fuse_features(text, image, &onehot, layout);
}

// --- parameters ---

std::vector<std::span<double>> ModelParameters::tensors() {
  std::vector<std::span<double>> out{view(head.weight), view(head.bias)};
  if (text) {
    out.push_back(view(text->embedding));
    out.push_back(view(text->w_input));
    out.push_back(view(text->w_state));
    out.push_back(view(text->bias));
  }
  if (image) {
    out.push_back(view(image->weight));
    out.push_back(view(image->bias));
  }
  return out;
}

std::vector<std::span<const double>> ModelParameters::tensors() const {
  auto mutable_views = const_cast<ModelParameters*>(this)->tensors();
  return {mutable_views.begin(), mutable_views.end()};
}

std::size_t ModelParameters::parameter_count() const {
  std::size_t n = 0;
  for (auto t : tensors()) n += t.size();
  return n;
}

ModelParameters ModelParameters::zeros_like() const {
  ModelParameters z;
  z.head = {Eigen::MatrixXd::Zero(head.weight.rows(), head.weight.cols()),
            Eigen::VectorXd::Zero(head.bias.size()), head.activation};
  if (text) z.text = TextEncoderParams::zeros(text->config);
  if (image) z.image = ImageProjectionParams::zeros(image->weight.cols(), image->weight.rows());
  return z;
}

// --- forward / backward ---

FusedFeature fused_features(const ModelParameters& params, const FeatureLayout& layout,
                            const SampleFeatures& sample, ForwardTrace* trace) {
  Eigen::VectorXd text;
  if (params.text) {
    TextTrace t = run_text_encoder(sample.tokens, *params.text);
    text = t.states.back();
    if (trace) trace->text = std::move(t);
  } else {
    text = sample.text;
  }
  Eigen::VectorXd image = params.image ? project_image(sample.image, *params.image) : sample.image;
  if (trace) trace->image_out = image;

  std::optional<OneHotEncoding> onehot;
  if (layout.cluster_dim > 0) {
    if (!sample.cluster) throw DataError("sample has no cluster id but the layout has a cluster segment");
    onehot.emplace(*sample.cluster, static_cast<int>(layout.cluster_dim));
  }
  return fuse_features(text, image, onehot ? &*onehot : nullptr, layout);
}

Eigen::VectorXd forward_logits(const ModelParameters& params, const FeatureLayout& layout,
                               const SampleFeatures& sample, const Eigen::VectorXd* dropout_mask,
                               ForwardTrace* trace) {
  FusedFeature fused = fused_features(params, layout, sample, trace);
  Eigen::VectorXd effective = fused.values;
  if (dropout_mask) {
    require_width(*dropout_mask, layout.total(), "dropout mask");
    effective.array() *= dropout_mask->array();
  }
  Eigen::VectorXd logits = head_logits(effective, params.head);
  if (!logits.allFinite()) throw NumericError("non-finite logits during forward pass");
  if (trace) {
    trace->fused = std::move(fused.values);
    trace->effective = std::move(effective);
    trace->logits = logits;
  }
  return logits;
}

double sample_loss(const ModelParameters& params, const FeatureLayout& layout, const SampleFeatures& sample,
                   Label label, const ClassPriors& priors, double tau, const Eigen::VectorXd* dropout_mask,
                   ModelParameters* grads) {
  ForwardTrace trace;
  const Eigen::VectorXd logits = forward_logits(params, layout, sample, dropout_mask, &trace);
  const LossAndGradient lg = params.head.activation == Activation::softmax
                                 ? logit_adjusted_loss(logits, label, priors, tau)
                                 : logit_adjusted_sigmoid_loss(logits, label, priors, tau);
  if (!grads) return lg.loss;

  grads->head.weight.noalias() += trace.effective * lg.gradient.transpose();
  grads->head.bias += lg.gradient;
  if (!params.text && !params.image) return lg.loss;

  Eigen::VectorXd d_fused = params.head.weight * lg.gradient;
  if (dropout_mask) d_fused.array() *= dropout_mask->array();
  if (params.text) {
    backprop_text_encoder(trace.text, *params.text, d_fused.segment(0, layout.text_dim), *grads->text);
  }
  if (params.image) {
    backprop_image_projection(sample.image, trace.image_out, *params.image,
                              d_fused.segment(layout.image_offset(), layout.image_dim), *grads->image);
  }
  return lg.loss;
}

}  // namespace cdel
