#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cdel/types.hpp"

namespace cdel {

enum class Metric { euclidean };
enum class Linkage { single, complete, average };

[[nodiscard]] std::string_view linkage_name(Linkage linkage) noexcept;
[[nodiscard]] std::optional<Linkage> parse_linkage(std::string_view text) noexcept;

// Symmetric, zero-diagonal, finite pairwise distances over an ordered id list.
class DistanceMatrix {
 public:
  DistanceMatrix(std::vector<std::string> ids, Eigen::MatrixXd distances);

  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return d_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return d_.rows(); }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return d_(i, j); }

  // Off-diagonal extremes; these bound the candidate threshold range.
  [[nodiscard]] double min_off_diagonal() const noexcept { return t_min_; }
  [[nodiscard]] double max_off_diagonal() const noexcept { return t_max_; }

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd d_;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
};

[[nodiscard]] DistanceMatrix pairwise_distances(const EmbeddingMatrix& points,
                                                Metric metric = Metric::euclidean);
[[nodiscard]] DistanceMatrix pairwise_distances(const FaceEncodingSet& encodings,
                                                Metric metric = Metric::euclidean);

// One agglomeration step. Leaves are 0..n-1; merge i creates node n+i.
struct Merge {
  int left;
  int right;
  double height;
  int size;
};

class LinkageTree {
 public:
  LinkageTree(int leaf_count, std::vector<Merge> merges);

  [[nodiscard]] int leaf_count() const noexcept { return n_; }
  [[nodiscard]] const std::vector<Merge>& merges() const noexcept { return merges_; }

  // Flat clusters: maximal subtrees whose merge heights are all <= t. Labels are
  // contiguous, numbered in order of first appearance over leaves 0..n-1.
  [[nodiscard]] std::vector<int> cut(double t) const;

 private:
  int n_;
  std::vector<Merge> merges_;
};

// Single linkage via a minimum spanning tree; complete and average via the
// nearest-neighbour chain. Both O(n^2) in time and memory.
[[nodiscard]] LinkageTree build_linkage(const DistanceMatrix& dm, Linkage linkage);

[[nodiscard]] ClusterAssignment hierarchical_flat_clusters(const DistanceMatrix& dm, Linkage linkage,
                                                           double t);

struct KMeansResult {
  ClusterAssignment assignment;
  Eigen::MatrixXd centroids;  // one row per cluster id of `assignment`
  double inertia = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline constexpr int kKMeansMaxIterations = 300;

// Lloyd's algorithm from farthest-point seeding. If duplicate points leave a
// cluster empty, it is dropped and ids are compacted, so c may be less than k.
[[nodiscard]] KMeansResult kmeans(const Eigen::MatrixXd& points, std::span<const std::string> ids,
                                  int k, std::uint64_t seed,
                                  int max_iterations = kKMeansMaxIterations);
[[nodiscard]] KMeansResult kmeans(const EmbeddingMatrix& emb, int k, std::uint64_t seed,
                                  int max_iterations = kKMeansMaxIterations);
[[nodiscard]] ClusterAssignment kmeans_cluster(const EmbeddingMatrix& emb, int k, std::uint64_t seed);

// RBF affinity exp(-gamma |x - y|^2), symmetric normalized Laplacian, row-normalized
// bottom-k eigenvectors, then k-means.
[[nodiscard]] ClusterAssignment spectral_cluster(const EmbeddingMatrix& emb, int k, double gamma,
                                                 std::uint64_t seed);

// Appends one shared cluster (id = old c) holding every faceless id.
[[nodiscard]] ClusterAssignment attach_faceless_cluster(const ClusterAssignment& assign,
                                                        std::span<const std::string> faceless_ids);

// What a trained model keeps of the clustering to place unseen samples.
struct ClusteringSummary {
  Eigen::MatrixXd centroids;  // row c = mean face encoding of face cluster c
  std::optional<int> faceless_cluster_id;

  [[nodiscard]] int face_cluster_count() const noexcept { return static_cast<int>(centroids.rows()); }
  [[nodiscard]] int total_clusters() const noexcept {
    return face_cluster_count() + (faceless_cluster_id ? 1 : 0);
  }

  // `assign` may carry the faceless cluster (it must then be the last id).
  static ClusteringSummary fit(const ClusterAssignment& assign, const EmbeddingMatrix& face_encodings);
};

// Nearest training centroid (ties toward the lower id), or the faceless cluster
// when there is no encoding.
[[nodiscard]] int assign_unseen(const std::optional<Eigen::VectorXd>& encoding,
                                const ClusteringSummary& model);

}  // namespace cdel
