#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace cdel {

// Class order is fixed everywhere: confusion-matrix rows/columns, probability
// vectors, argmax tie-breaking.
enum class Label : std::uint8_t { negative = 0, neutral = 1, positive = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kClassOrder{Label::negative, Label::neutral,
                                                            Label::positive};

[[nodiscard]] constexpr std::size_t index_of(Label label) noexcept {
  return static_cast<std::size_t>(label);
}
[[nodiscard]] std::string_view label_name(Label label) noexcept;
[[nodiscard]] std::optional<Label> parse_label(std::string_view text) noexcept;
[[nodiscard]] Label label_at(std::size_t index);

struct SampleRecord {
  std::string id;
  std::string text;  // may be empty
  std::optional<std::string> image_ref;
  std::optional<Label> label;
};

// Ordered, id-unique collection of samples. Immutable after construction.
class SampleTable {
 public:
  SampleTable() = default;
  explicit SampleTable(std::vector<SampleRecord> records);

  [[nodiscard]] const std::vector<SampleRecord>& records() const noexcept { return records_; }
  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
  [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
  [[nodiscard]] const SampleRecord& operator[](std::size_t i) const { return records_[i]; }

  [[nodiscard]] const SampleRecord* find(std::string_view id) const;
  [[nodiscard]] bool contains(std::string_view id) const { return find(id) != nullptr; }
  [[nodiscard]] std::vector<std::string> ids() const;
  [[nodiscard]] bool all_labeled() const noexcept;
  [[nodiscard]] SampleTable subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<SampleRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

// id-aligned n x d real matrix. d >= 1, all entries finite; n may be 0.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::string> ids, Eigen::MatrixXd values);

  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::Index rows() const noexcept { return values_.rows(); }
  [[nodiscard]] Eigen::Index dim() const noexcept { return values_.cols(); }
  [[nodiscard]] std::optional<Eigen::Index> row_of(std::string_view id) const;
  [[nodiscard]] Eigen::VectorXd row(Eigen::Index i) const { return values_.row(i).transpose(); }

  // Rows for the given ids in the given order; every id must be present.
  [[nodiscard]] EmbeddingMatrix select(std::span<const std::string> ids) const;

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd values_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

// Face-bearing samples carry an encoding row; every other sample of the table is faceless.
class FaceEncodingSet {
 public:
  FaceEncodingSet() = default;
  FaceEncodingSet(EmbeddingMatrix encodings, std::vector<std::string> faceless_ids);

  // Faceless ids are the table ids absent from `encodings`, in table order.
  static FaceEncodingSet derive(const SampleTable& table, const EmbeddingMatrix& encodings);

  [[nodiscard]] const EmbeddingMatrix& encodings() const noexcept { return encodings_; }
  [[nodiscard]] const std::vector<std::string>& faceless_ids() const noexcept {
    return faceless_ids_;
  }
  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(encodings_.rows()) + faceless_ids_.size();
  }

 private:
  EmbeddingMatrix encodings_;
  std::vector<std::string> faceless_ids_;
};

// id -> cluster id in [0, c). Ids are kept in insertion order.
class ClusterAssignment {
 public:
  ClusterAssignment() = default;
  // Cluster ids must already be contiguous from 0.
  ClusterAssignment(std::vector<std::string> ids, std::vector<int> cluster_ids,
                    std::optional<int> faceless_cluster_id = std::nullopt);

  // Relabels arbitrary integer labels to 0.. in order of first appearance.
  static ClusterAssignment from_raw_labels(std::vector<std::string> ids,
                                           std::span<const int> raw_labels);

  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
  [[nodiscard]] const std::vector<int>& cluster_ids() const noexcept { return clusters_; }
  [[nodiscard]] int cluster_count() const noexcept { return cluster_count_; }
  [[nodiscard]] std::optional<int> faceless_cluster_id() const noexcept { return faceless_; }
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
  [[nodiscard]] std::optional<int> cluster_of(std::string_view id) const;
  [[nodiscard]] std::vector<std::size_t> cluster_sizes() const;

  // Cluster id for each of `ids`, in that order; all must be mapped.
  [[nodiscard]] std::vector<int> labels_for(std::span<const std::string> ids) const;

 private:
  std::vector<std::string> ids_;
  std::vector<int> clusters_;
  int cluster_count_ = 0;
  std::optional<int> faceless_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Class prior probabilities in class order; strictly positive, summing to 1.
class ClassPriors {
 public:
  ClassPriors();  // uniform
  explicit ClassPriors(std::array<double, kNumClasses> priors);

  static ClassPriors from_counts(std::span<const std::size_t, kNumClasses> counts);
  static ClassPriors from_labels(std::span<const Label> labels);

  [[nodiscard]] const std::array<double, kNumClasses>& values() const noexcept { return p_; }
  [[nodiscard]] double operator[](std::size_t i) const { return p_[i]; }

 private:
  std::array<double, kNumClasses> p_;
};

}  // namespace cdel
