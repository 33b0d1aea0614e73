#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cdel/clustering.hpp"
#include "cdel/network.hpp"
#include "cdel/types.hpp"

namespace cdel {

enum class TextMode { toy, precomputed };

[[nodiscard]] std::string_view text_mode_name(TextMode m) noexcept;
[[nodiscard]] std::string_view image_mode_name(ImageMode m) noexcept;

// How each sample's text and image segments are produced.
struct EncoderSettings {
  TextMode text_mode = TextMode::toy;
  TextEncoderConfig toy_text;
  Eigen::Index text_input_dim = 0;  // precomputed text width

  ImageMode image_mode = ImageMode::passthrough;
  Eigen::Index image_input_dim = 0;  // 0: no image segment
  Eigen::Index image_projection_dim = 32;

  bool text_zero_fallback = true;   // missing/empty text -> zero embedding
  bool image_zero_fallback = true;  // missing image embedding -> zero vector
  bool use_clusters = true;         // false: no-cluster ablation
};

// Defaults follow the reference setup: batch 128, Adam(2e-5, 0.9, 0.999, 1e-8), dropout 0.3.
struct TrainConfig {
  int batch_size = 128;
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double dropout_rate = 0.3;
  int epochs = 10;
  std::uint64_t seed = 0;
  double tau = 1.0;
  Activation activation = Activation::softmax;

  void validate() const;
};

struct FusionModel {
  EncoderSettings settings;
  FeatureLayout layout;
  ModelParameters params;
  ClusteringSummary clustering;
  ClassPriors priors;
  double tau = 1.0;
};

// Non-owning inputs for training and prediction. Only `samples` is required; the
// rest depends on the encoder settings.
struct DatasetView {
  const SampleTable* samples = nullptr;
  const EmbeddingMatrix* text_embeddings = nullptr;
  const EmbeddingMatrix* image_embeddings = nullptr;
  const EmbeddingMatrix* face_encodings = nullptr;
  const ClusterAssignment* assignment = nullptr;  // training only
};

struct TrainResult {
  FusionModel model;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Parameters at the seeded initialization, before any update.
[[nodiscard]] FusionModel initialize_model(const DatasetView& data, const EncoderSettings& settings,
                                           const TrainConfig& config);

[[nodiscard]] TrainResult train_model(const DatasetView& data, const EncoderSettings& settings,
                                      const TrainConfig& config);

// Resolves one sample's network inputs; `cluster` is the one-hot slot when clustering is used.
[[nodiscard]] SampleFeatures sample_features(const FusionModel& model, const SampleRecord& record,
                                             const DatasetView& data, std::optional<int> cluster);

struct Prediction {
  std::string id;
  Label label;
  std::array<double, kNumClasses> probabilities{};
  int cluster = -1;  // -1 for the no-cluster layout
};

[[nodiscard]] std::vector<Prediction> predict(const FusionModel& model, const DatasetView& data);

// Versioned JSON document; reload reproduces predictions bit for bit.
inline constexpr std::string_view kModelFormat = "cdel-model/1";
[[nodiscard]] std::string model_to_json(const FusionModel& model, std::string_view config_hash = "");
[[nodiscard]] FusionModel model_from_json(std::string_view json);

}  // namespace cdel
