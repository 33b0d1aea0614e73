#include <cmath>
#include <limits>

#include "cdel/errors.hpp"
#include "cdel/validity.hpp"

namespace cdel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_defined(std::size_t n, int c, const char* index) {
  if (c < 2 || static_cast<std::size_t>(c) > n - 1 || n < 3) {
    throw DataError(std::string(index) + " is undefined for c = " + std::to_string(c) + " clusters over n = " +
                    std::to_string(n) + " samples (needs 2 <= c <= n-1)");
  }
}

void check_labels(std::span<const int> labels, int c) {
  for (int l : labels) {
    if (l < 0 || l >= c) throw DataError("cluster label " + std::to_string(l) + " outside [0, c)");
  }
}

Eigen::MatrixXd centroids_of(const Eigen::MatrixXd& x, std::span<const int> labels, int c,
                             std::vector<double>& counts) {
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(c, x.cols());
  counts.assign(static_cast<std::size_t>(c), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    centroids.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 1.0;
  }
  for (int k = 0; k < c; ++k) centroids.row(k) /= counts[static_cast<std::size_t>(k)];
  return centroids;
}

// Labels for the embedding rows; the assignment must cover exactly the same ids.
std::vector<int> aligned_labels(std::span<const std::string> ids, const ClusterAssignment& assign) {
  if (ids.size() != assign.size()) {
    throw DataError("assignment covers " + std::to_string(assign.size()) + " ids but the feature matrix has " +
                    std::to_string(ids.size()) + " rows");
  }
  return assign.labels_for(ids);
}

}  // namespace

double silhouette_from_labels(const Eigen::MatrixXd& d, std::span<const int> labels, int c) {
  const auto n = static_cast<std::size_t>(d.rows());
  require_defined(n, c, "silhouette coefficient");
  check_labels(labels, c);
  std::vector<double> sizes(static_cast<std::size_t>(c), 0.0);
  for (int l : labels) sizes[static_cast<std::size_t>(l)] += 1.0;

  std::vector<double> sums(static_cast<std::size_t>(c));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1.0) continue;  // singleton: s(i) = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      sums[static_cast<std::size_t>(labels[j])] += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double a = sums[own] / (sizes[own] - 1.0);
    double b = kInf;
    for (std::size_t k = 0; k < sums.size(); ++k) {
      if (k != own) b = std::min(b, sums[k] / sizes[k]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double calinski_harabasz_from_labels(const Eigen::MatrixXd& x, std::span<const int> labels, int c) {
  const auto n = static_cast<std::size_t>(x.rows());
  require_defined(n, c, "Calinski-Harabasz score");
  check_labels(labels, c);
  std::vector<double> counts;
  const Eigen::MatrixXd centroids = centroids_of(x, labels, c, counts);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  double between = 0.0;
  for (int k = 0; k < c; ++k) {
    between += counts[static_cast<std::size_t>(k)] * (centroids.row(k) - mean).squaredNorm();
  }
  double within = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    within += (x.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  if (within == 0.0) return kInf;
  return (between / static_cast<double>(c - 1)) / (within / static_cast<double>(n - static_cast<std::size_t>(c)));
}

double davies_bouldin_from_labels(const Eigen::MatrixXd& x, std::span<const int> labels, int c) {
  const auto n = static_cast<std::size_t>(x.rows());
  require_defined(n, c, "Davies-Bouldin index");
  check_labels(labels, c);
  std::vector<double> counts;
  const Eigen::MatrixXd centroids = centroids_of(x, labels, c, counts);
  std::vector<double> scatter(static_cast<std::size_t>(c), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int k = labels[static_cast<std::size_t>(i)];
    scatter[static_cast<std::size_t>(k)] += (x.row(i) - centroids.row(k)).norm();
  }
  for (int k = 0; k < c; ++k) scatter[static_cast<std::size_t>(k)] /= counts[static_cast<std::size_t>(k)];

  double total = 0.0;
  for (int i = 0; i < c; ++i) {
    double worst = 0.0;
    for (int j = 0; j < c; ++j) {
      if (i == j) continue;
      const double separation = (centroids.row(i) - centroids.row(j)).norm();
      if (separation == 0.0) return kInf;
      worst = std::max(worst, (scatter[static_cast<std::size_t>(i)] + scatter[static_cast<std::size_t>(j)]) / separation);
    }
    total += worst;
  }
  return total / static_cast<double>(c);
}

double silhouette_coefficient(const DistanceMatrix& dm, const ClusterAssignment& assign) {
  const auto labels = aligned_labels(dm.ids(), assign);
  return silhouette_from_labels(dm.values(), labels, assign.cluster_count());
}

double calinski_harabasz_score(const EmbeddingMatrix& emb, const ClusterAssignment& assign) {
  const auto labels = aligned_labels(emb.ids(), assign);
  return calinski_harabasz_from_labels(emb.values(), labels, assign.cluster_count());
}

double davies_bouldin_index(const EmbeddingMatrix& emb, const ClusterAssignment& assign) {
  const auto labels = aligned_labels(emb.ids(), assign);
  return davies_bouldin_from_labels(emb.values(), labels, assign.cluster_count());
}

ValidityScores score_partition(const DistanceMatrix& dm, const EmbeddingMatrix& emb,
                               const ClusterAssignment& assign) {
  ValidityScores s;
  s.c = assign.cluster_count();
  s.sc = silhouette_coefficient(dm, assign);
  s.chs = calinski_harabasz_score(emb, assign);
  s.dbi = davies_bouldin_index(emb, assign);
  return s;
}

}  // namespace cdel
