#include <cmath>
#include <numeric>

#include "cdel/errors.hpp"
#include "cdel/model.hpp"
#include "cdel/random.hpp"

namespace cdel {
namespace {

// Sub-stream ids of the run seed.
enum Stream : std::uint64_t { kHeadInit = 1, kTextInit = 2, kImageInit = 3, kShuffle = 4, kDropout = 5 };

class Adam {
 public:
  Adam(const TrainConfig& cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(ModelParameters& params, const ModelParameters& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto p = params.tensors();
    auto g = grads.tensors();
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p[i].size(); ++j, ++k) {
        const double gj = g[i][j];
        m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * gj;
        v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * gj * gj;
        const double m_hat = m_[k] / c1;
        const double v_hat = v_[k] / c2;
        p[i][j] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
      }
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

void scale(ModelParameters& grads, double factor) {
  for (auto t : grads.tensors()) {
    for (double& x : t) x *= factor;
  }
}

}  // namespace

std::string_view text_mode_name(TextMode m) noexcept { return m == TextMode::toy ? "toy" : "precomputed"; }

std::string_view image_mode_name(ImageMode m) noexcept {
  return m == ImageMode::passthrough ? "passthrough" : "projection";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!std::isfinite(tau)) throw ConfigError("tau must be finite");
}

FusionModel initialize_model(const DatasetView& data, const EncoderSettings& requested,
                             const TrainConfig& config) {
  config.validate();
  if (!data.samples || data.samples->empty()) throw DataError("training set is empty");
  FusionModel model;
  model.settings = requested;
  EncoderSettings& s = model.settings;

  if (s.text_mode == TextMode::precomputed) {
    if (s.text_input_dim == 0 && data.text_embeddings) s.text_input_dim = data.text_embeddings->dim();
    if (s.text_input_dim < 1) throw ConfigError("precomputed text mode needs a text embedding file");
    model.layout.text_dim = s.text_input_dim;
  } else {
    model.layout.text_dim = s.toy_text.state_dim;
    model.params.text = TextEncoderParams::initialize(s.toy_text, derive_seed(config.seed, kTextInit));
  }

  if (s.image_input_dim == 0 && data.image_embeddings) s.image_input_dim = data.image_embeddings->dim();
  if (s.image_input_dim > 0) {
    if (s.image_mode == ImageMode::projection) {
      model.layout.image_dim = s.image_projection_dim;
      model.params.image = ImageProjectionParams::initialize(s.image_input_dim, s.image_projection_dim,
                                                             derive_seed(config.seed, kImageInit));
    } else {
      model.layout.image_dim = s.image_input_dim;
    }
  }

  if (s.use_clusters) {
    if (!data.assignment) throw DataError("training with cluster features needs a cluster assignment");
    if (!data.face_encodings) throw DataError("training with cluster features needs the face encodings");
    model.clustering = ClusteringSummary::fit(*data.assignment, *data.face_encodings);
    model.layout.cluster_dim = model.clustering.total_clusters();
  }

  std::vector<Label> labels;
  for (const auto& r : data.samples->records()) {
    if (!r.label) throw DataError("training sample '" + r.id + "' has no label");
    labels.push_back(*r.label);
  }
  model.priors = ClassPriors::from_labels(labels);
  model.tau = config.tau;
  model.params.head = ClassifierHead::initialize(model.layout.total(), static_cast<Eigen::Index>(kNumClasses),
                                                 config.activation, derive_seed(config.seed, kHeadInit));
  return model;
}

SampleFeatures sample_features(const FusionModel& model, const SampleRecord& record, const DatasetView& data,
                               std::optional<int> cluster) {
  const EncoderSettings& s = model.settings;
  SampleFeatures f;
  if (s.text_mode == TextMode::toy) {
    f.tokens = hash_tokens(record.text, s.toy_text.hash_width);
  } else if (record.text.empty() && s.text_zero_fallback) {
    f.text = Eigen::VectorXd::Zero(s.text_input_dim);
  } else {
    f.text = lookup_embedding(record.id, data.text_embeddings, s.text_input_dim, s.text_zero_fallback,
                              "text embedding");
  }
  if (s.image_input_dim > 0) {
    f.image = lookup_embedding(record.id, data.image_embeddings, s.image_input_dim, s.image_zero_fallback,
                               "image embedding");
  }
  if (model.layout.cluster_dim > 0) f.cluster = cluster;
  return f;
}

TrainResult train_model(const DatasetView& data, const EncoderSettings& settings, const TrainConfig& config) {
  TrainResult result{initialize_model(data, settings, config), {}};
  FusionModel& model = result.model;
  const auto& records = data.samples->records();

  std::vector<SampleFeatures> features;
  std::vector<Label> labels;
  features.reserve(records.size());
  for (const auto& r : records) {
    std::optional<int> cluster;
    if (model.layout.cluster_dim > 0) {
      cluster = data.assignment->cluster_of(r.id);
      if (!cluster) throw DataError("training sample '" + r.id + "' has no cluster id");
    }
    features.push_back(sample_features(model, r, data, cluster));
    labels.push_back(*r.label);
  }

  Rng shuffle_rng(derive_seed(config.seed, kShuffle));
  Rng dropout_rng(derive_seed(config.seed, kDropout));
  Adam optimizer(config, model.params.parameter_count());
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index width = model.layout.total();
  const double keep_scale = 1.0 / (1.0 - config.dropout_rate);
  Eigen::VectorXd mask(width);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      ModelParameters grads = model.params.zeros_like();
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const Eigen::VectorXd* m = nullptr;
        if (config.dropout_rate > 0.0) {
          for (Eigen::Index j = 0; j < width; ++j) {
            mask(j) = dropout_rng.uniform() < config.dropout_rate ? 0.0 : keep_scale;
          }
          m = &mask;
        }
        epoch_total += sample_loss(model.params, model.layout, features[i], labels[i], model.priors,
                                   model.tau, m, &grads);
      }
      scale(grads, 1.0 / static_cast<double>(stop - start));
      optimizer.step(model.params, grads);
    }
    const double mean_loss = epoch_total / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) {
      throw NumericError("training diverged: non-finite loss in epoch " + std::to_string(epoch + 1));
    }
    result.epoch_loss.push_back(mean_loss);
  }
  return result;
}

std::vector<Prediction> predict(const FusionModel& model, const DatasetView& data) {
  if (!data.samples) throw DataError("prediction needs a sample table");
  model.params.head.validate();
  if (model.params.head.input_dim() != model.layout.total()) {
    throw DataError("model head width does not match its feature layout");
  }
  std::vector<Prediction> out;
  out.reserve(data.samples->size());
  for (const auto& r : data.samples->records()) {
    std::optional<int> cluster;
    if (model.layout.cluster_dim > 0) {
      std::optional<Eigen::VectorXd> encoding;
      if (data.face_encodings) {
        if (auto row = data.face_encodings->row_of(r.id)) encoding = data.face_encodings->row(*row);
      }
      cluster = assign_unseen(encoding, model.clustering);
    }
    const SampleFeatures f = sample_features(model, r, data, cluster);
    const Eigen::VectorXd probs = activate(forward_logits(model.params, model.layout, f), model.params.head.activation);
    Prediction p;
    p.id = r.id;
    p.label = argmax_label(probs);
    for (std::size_t k = 0; k < kNumClasses; ++k) p.probabilities[k] = probs(static_cast<Eigen::Index>(k));
    p.cluster = cluster.value_or(-1);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cdel
