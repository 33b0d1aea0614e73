#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdel/clustering.hpp"
#include "cdel/model.hpp"
#include "cdel/validity.hpp"

namespace cdel {

// Flat `key = value` run configuration. Relative paths resolve against the
// directory holding the config file. See README.md for the key reference.
struct RunConfig {
  using Entries = std::map<std::string, std::string>;

  Entries entries;  // explicit keys after command-line overrides
  std::filesystem::path base_dir;

  std::filesystem::path manifest;
  std::filesystem::path test_manifest;  // predict/evaluate target; defaults to manifest
  std::filesystem::path face_encodings;
  std::filesystem::path text_embeddings;
  std::filesystem::path image_embeddings;
  std::filesystem::path assignment;   // train: precomputed assignment
  std::filesystem::path model;        // predict: defaults to <output_dir>/model.json
  std::filesystem::path predictions;  // evaluate: defaults to <output_dir>/predictions.csv
  std::filesystem::path output_dir = "out";

  std::uint64_t seed = 0;

  std::optional<Algorithm> algorithm = Algorithm::hierarchical;  // nullopt: select automatically
  Linkage linkage = Linkage::single;
  Metric metric = Metric::euclidean;
  int k = 0;  // k-means / spectral; 0 takes c_op of the threshold selection
  double gamma = 1.0;
  std::vector<double> force_t;  // one forced t_op, or three forced per-indicator picks

  TrainConfig train;
  EncoderSettings encoders;

  double split_fraction = 0.0;  // > 0 holds out a stratified dev part during `train`
  int folds = 5;

  static RunConfig parse(std::string_view text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Rebuilds typed fields from `entries` (after overrides were applied).
  static RunConfig from_entries(Entries entries, const std::filesystem::path& base_dir);

  // FNV-1a over the sorted explicit entries, excluding output_dir.
  [[nodiscard]] std::string hash() const;

  [[nodiscard]] std::filesystem::path out(std::string_view name) const { return output_dir / name; }
};

[[nodiscard]] RunConfig::Entries parse_config_entries(std::string_view text);

}  // namespace cdel
