#include <json.hpp>

#include "cdel/errors.hpp"
#include "cdel/model.hpp"

namespace cdel {
namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from(const Json& j, Eigen::Index cols_if_empty, const char* what) {
  if (!j.is_array()) throw DataError(std::string("model field '") + what + "' must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("model field '") + what + "' is ragged at row " + std::to_string(i));
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from(const Json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string("model field '") + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const FusionModel& model, std::string_view config_hash) {
  const EncoderSettings& s = model.settings;
  Json doc;
  doc["format"] = kModelFormat;
  doc["config_hash"] = std::string(config_hash);
  Json classes = Json::array();
  for (Label l : kClassOrder) classes.push_back(label_name(l));
  doc["class_order"] = classes;
  doc["layout"] = {{"text", model.layout.text_dim},
                   {"image", model.layout.image_dim},
                   {"cluster", model.layout.cluster_dim}};
  doc["encoders"] = {{"text_mode", text_mode_name(s.text_mode)},
                     {"text_hash_width", s.toy_text.hash_width},
                     {"text_embed_dim", s.toy_text.embed_dim},
                     {"text_state_dim", s.toy_text.state_dim},
                     {"text_input_dim", s.text_input_dim},
                     {"image_mode", image_mode_name(s.image_mode)},
                     {"image_input_dim", s.image_input_dim},
                     {"image_projection_dim", s.image_projection_dim},
                     {"text_zero_fallback", s.text_zero_fallback},
                     {"image_zero_fallback", s.image_zero_fallback},
                     {"use_clusters", s.use_clusters}};
  doc["priors"] = model.priors.values();
  doc["tau"] = model.tau;
  doc["activation"] = activation_name(model.params.head.activation);
  doc["head"] = {{"weight", matrix_json(model.params.head.weight)}, {"bias", vector_json(model.params.head.bias)}};
  if (model.params.text) {
    const auto& t = *model.params.text;
    doc["text_encoder"] = {{"embedding", matrix_json(t.embedding)},
                           {"w_input", matrix_json(t.w_input)},
                           {"w_state", matrix_json(t.w_state)},
                           {"bias", vector_json(t.bias)}};
  }
  if (model.params.image) {
    doc["image_projection"] = {{"weight", matrix_json(model.params.image->weight)},
                               {"bias", vector_json(model.params.image->bias)}};
  }
  Json clustering;
  clustering["centroids"] = matrix_json(model.clustering.centroids);
  clustering["centroid_dim"] = model.clustering.centroids.cols();
  clustering["faceless_cluster_id"] =
      model.clustering.faceless_cluster_id ? Json(*model.clustering.faceless_cluster_id) : Json(nullptr);
  doc["clustering"] = clustering;
  return doc.dump(1) + "\n";
}

FusionModel model_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) {
      throw DataError("unsupported model format '" + doc.at("format").get<std::string>() + "'");
    }
    const Json& classes = doc.at("class_order");
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      if (classes.at(i).get<std::string>() != label_name(kClassOrder[i])) {
        throw DataError("model class order does not match negative, neutral, positive");
      }
    }
    FusionModel m;
    const Json& enc = doc.at("encoders");
    EncoderSettings& s = m.settings;
    s.text_mode = enc.at("text_mode").get<std::string>() == "toy" ? TextMode::toy : TextMode::precomputed;
    s.toy_text = {enc.at("text_hash_width").get<int>(), enc.at("text_embed_dim").get<int>(),
                  enc.at("text_state_dim").get<int>()};
    s.text_input_dim = enc.at("text_input_dim").get<Eigen::Index>();
    s.image_mode = enc.at("image_mode").get<std::string>() == "projection" ? ImageMode::projection
                                                                           : ImageMode::passthrough;
    s.image_input_dim = enc.at("image_input_dim").get<Eigen::Index>();
    s.image_projection_dim = enc.at("image_projection_dim").get<Eigen::Index>();
    s.text_zero_fallback = enc.at("text_zero_fallback").get<bool>();
    s.image_zero_fallback = enc.at("image_zero_fallback").get<bool>();
    s.use_clusters = enc.at("use_clusters").get<bool>();

    const Json& layout = doc.at("layout");
    m.layout = {layout.at("text").get<Eigen::Index>(), layout.at("image").get<Eigen::Index>(),
                layout.at("cluster").get<Eigen::Index>()};
    m.priors = ClassPriors(doc.at("priors").get<std::array<double, kNumClasses>>());
    m.tau = doc.at("tau").get<double>();
    const auto activation = parse_activation(doc.at("activation").get<std::string>());
    if (!activation) throw DataError("unknown activation in model file");

    m.params.head.weight = matrix_from(doc.at("head").at("weight"), kNumClasses, "head.weight");
    m.params.head.bias = vector_from(doc.at("head").at("bias"), "head.bias");
    m.params.head.activation = *activation;
    m.params.head.validate();
    if (doc.contains("text_encoder")) {
      const Json& t = doc["text_encoder"];
      TextEncoderParams p;
      p.config = s.toy_text;
      p.embedding = matrix_from(t.at("embedding"), s.toy_text.hash_width, "text_encoder.embedding");
      p.w_input = matrix_from(t.at("w_input"), s.toy_text.embed_dim, "text_encoder.w_input");
      p.w_state = matrix_from(t.at("w_state"), s.toy_text.state_dim, "text_encoder.w_state");
      p.bias = vector_from(t.at("bias"), "text_encoder.bias");
      m.params.text = std::move(p);
    }
    if (doc.contains("image_projection")) {
      const Json& ip = doc["image_projection"];
      m.params.image = ImageProjectionParams{matrix_from(ip.at("weight"), s.image_input_dim, "image_projection.weight"),
                                             vector_from(ip.at("bias"), "image_projection.bias")};
    }
    const Json& cl = doc.at("clustering");
    m.clustering.centroids = matrix_from(cl.at("centroids"), cl.at("centroid_dim").get<Eigen::Index>(),
                                         "clustering.centroids");
    if (!cl.at("faceless_cluster_id").is_null()) {
      m.clustering.faceless_cluster_id = cl.at("faceless_cluster_id").get<int>();
    }
    if (m.params.head.input_dim() != m.layout.total()) {
      throw DataError("model head width does not match its feature layout");
    }
    return m;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace cdel
