#pragma once

#include <Eigen/Dense>

namespace cdel {

// Exactly one hot slot out of `size`.
class OneHotEncoding {
 public:
  OneHotEncoding(int hot, int size);

  [[nodiscard]] int hot() const noexcept { return hot_; }
  [[nodiscard]] int size() const noexcept { return size_; }
  [[nodiscard]] Eigen::VectorXd dense() const;

 private:
  int hot_;
  int size_;
};

[[nodiscard]] OneHotEncoding one_hot_encode(int cluster_id, int total_clusters);

// Segment widths of the fused vector, always laid out text | image | cluster.
struct FeatureLayout {
  Eigen::Index text_dim = 0;
  Eigen::Index image_dim = 0;
  Eigen::Index cluster_dim = 0;

  [[nodiscard]] Eigen::Index total() const noexcept { return text_dim + image_dim + cluster_dim; }
  [[nodiscard]] Eigen::Index image_offset() const noexcept { return text_dim; }
  [[nodiscard]] Eigen::Index cluster_offset() const noexcept { return text_dim + image_dim; }
  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct FusedFeature {
  Eigen::VectorXd values;
  FeatureLayout layout;

  [[nodiscard]] auto text() const { return values.segment(0, layout.text_dim); }
  [[nodiscard]] auto image() const { return values.segment(layout.image_offset(), layout.image_dim); }
  [[nodiscard]] auto cluster() const { return values.segment(layout.cluster_offset(), layout.cluster_dim); }
};

// Throws DataError when a segment does not match the layout. A layout with
// cluster_dim == 0 takes no one-hot (the no-cluster ablation).
[[nodiscard]] FusedFeature fuse_features(const Eigen::VectorXd& text, const Eigen::VectorXd& image,
                                         const OneHotEncoding* onehot, const FeatureLayout& layout);
[[nodiscard]] FusedFeature fuse_features(const Eigen::VectorXd& text, const Eigen::VectorXd& image,
                                         const OneHotEncoding& onehot, const FeatureLayout& layout);

}  // namespace cdel
