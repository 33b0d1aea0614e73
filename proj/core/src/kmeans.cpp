#include <limits>
#include <unordered_map>

#include "cdel/clustering.hpp"
#include "cdel/errors.hpp"
#include "cdel/random.hpp"

namespace cdel {
namespace {

// First centre drawn from the seed, then repeatedly the point farthest from
// all chosen centres (lowest index on ties).
Eigen::MatrixXd farthest_point_seeds(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  Rng rng(seed);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd centres(k, x.cols());
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

  auto first = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
  centres.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  for (int c = 1; c < k; ++c) {
    Eigen::Index pick = -1;
    double pick_d = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), (x.row(i) - centres.row(c - 1)).squaredNorm());
      if (!chosen[static_cast<std::size_t>(i)] && nearest(i) > pick_d) {
        pick_d = nearest(i);
        pick = i;
      }
    }
    centres.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
  }
  return centres;
}

std::vector<int> nearest_centres(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centres) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centres.rows(); ++c) {
      const double d = (x.row(i) - centres.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                              const Eigen::MatrixXd& previous) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(previous.rows(), previous.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(previous.rows()), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (Eigen::Index c = 0; c < previous.rows(); ++c) {
    // An empty cluster keeps its centre.
    if (counts[static_cast<std::size_t>(c)] == 0) {
      sums.row(c) = previous.row(c);
    } else {
      sums.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  return sums;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& x, std::span<const std::string> ids, int k,
                    std::uint64_t seed, int max_iterations) {
  const Eigen::Index n = x.rows();
  if (k < 1) throw ConfigError("k-means needs k >= 1, got " + std::to_string(k));
  if (k > n) {
    throw ConfigError("k-means k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  }
  if (static_cast<Eigen::Index>(ids.size()) != n) throw DataError("k-means ids do not match points");

  Eigen::MatrixXd centres = farthest_point_seeds(x, k, seed);
  std::vector<int> labels = nearest_centres(x, centres);
  KMeansResult result;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    centres = cluster_means(x, labels, centres);
    std::vector<int> next = nearest_centres(x, centres);
    result.iterations = iter;
    if (next == labels) {
      result.converged = true;
      break;
    }
    labels = std::move(next);
  }

  // Compact to first-appearance order, dropping clusters left empty.
  std::unordered_map<int, int> remap;
  std::vector<int> compact(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
    compact[i] = it->second;
  }
  result.centroids.resize(static_cast<Eigen::Index>(remap.size()), x.cols());
  for (const auto& [old_id, new_id] : remap) result.centroids.row(new_id) = centres.row(old_id);
  for (Eigen::Index i = 0; i < n; ++i) {
    result.inertia += (x.row(i) - result.centroids.row(compact[static_cast<std::size_t>(i)])).squaredNorm();
  }
  result.assignment = ClusterAssignment({ids.begin(), ids.end()}, std::move(compact));
  return result;
}

KMeansResult kmeans(const EmbeddingMatrix& emb, int k, std::uint64_t seed, int max_iterations) {
  return kmeans(emb.values(), emb.ids(), k, seed, max_iterations);
}

ClusterAssignment kmeans_cluster(const EmbeddingMatrix& emb, int k, std::uint64_t seed) {
  return kmeans(emb, k, seed).assignment;
}

}  // namespace cdel
