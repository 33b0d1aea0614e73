#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "cdel/clustering.hpp"
#include "cdel/errors.hpp"

namespace cdel {

std::string_view linkage_name(Linkage linkage) noexcept {
  switch (linkage) {
    case Linkage::single:
      return "single";
    case Linkage::complete:
      return "complete";
    case Linkage::average:
      return "average";
  }
  return "?";
}

std::optional<Linkage> parse_linkage(std::string_view text) noexcept {
  for (Linkage l : {Linkage::single, Linkage::complete, Linkage::average}) {
    if (text == linkage_name(l)) return l;
  }
  return std::nullopt;
}

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids, Eigen::MatrixXd distances)
    : ids_(std::move(ids)), d_(std::move(distances)) {
  const Eigen::Index n = d_.rows();
  if (d_.cols() != n || static_cast<Eigen::Index>(ids_.size()) != n) {
    throw DataError("distance matrix must be square and match its id list");
  }
  if (!d_.allFinite()) throw DataError("distance matrix contains non-finite entries");
  t_min_ = std::numeric_limits<double>::infinity();
  t_max_ = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d_(i, i) != 0.0) throw DataError("distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (d_(i, j) < 0.0) throw DataError("negative distance");
      if (std::abs(d_(i, j) - d_(j, i)) > 1e-12) throw DataError("distance matrix is not symmetric");
      t_min_ = std::min(t_min_, d_(i, j));
      t_max_ = std::max(t_max_, d_(i, j));
    }
  }
  if (n < 2) t_min_ = 0.0;
}

DistanceMatrix pairwise_distances(const EmbeddingMatrix& points, Metric) {
  const Eigen::Index n = points.rows();
  if (n < 2) {
    throw DataError("pairwise distances need at least 2 face-bearing samples, got " + std::to_string(n));
  }
  const Eigen::MatrixXd& x = points.values();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (x.row(i) - x.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return DistanceMatrix(points.ids(), std::move(d));
}

DistanceMatrix pairwise_distances(const FaceEncodingSet& encodings, Metric metric) {
  return pairwise_distances(encodings.encodings(), metric);
}

ClusterAssignment hierarchical_flat_clusters(const DistanceMatrix& dm, Linkage linkage, double t) {
  if (!(t > 0.0)) throw ConfigError("flat-cluster threshold must be > 0, got " + std::to_string(t));
  const auto labels = build_linkage(dm, linkage).cut(t);
  return ClusterAssignment(dm.ids(), labels);
}

ClusterAssignment attach_faceless_cluster(const ClusterAssignment& assign,
                                          std::span<const std::string> faceless_ids) {
  if (faceless_ids.empty()) return assign;
  std::vector<std::string> ids = assign.ids();
  std::vector<int> clusters = assign.cluster_ids();
  const int faceless = assign.cluster_count();
  std::unordered_set<std::string> seen;
  for (const auto& id : faceless_ids) {
    if (assign.cluster_of(id)) {
      throw DataError("faceless id '" + id + "' is already assigned to a face cluster");
    }
    if (!seen.insert(id).second) throw DataError("duplicate faceless id '" + id + "'");
    ids.push_back(id);
    clusters.push_back(faceless);
  }
  return ClusterAssignment(std::move(ids), std::move(clusters), faceless);
}

ClusteringSummary ClusteringSummary::fit(const ClusterAssignment& assign,
                                         const EmbeddingMatrix& face_encodings) {
  const auto faceless = assign.faceless_cluster_id();
  const int face_clusters = assign.cluster_count() - (faceless ? 1 : 0);
  if (faceless && *faceless != face_clusters) {
    throw DataError("faceless cluster must carry the last cluster id");
  }
  ClusteringSummary out;
  out.faceless_cluster_id = faceless;
  out.centroids = Eigen::MatrixXd::Zero(face_clusters, face_encodings.dim());
  std::vector<std::size_t> counts(static_cast<std::size_t>(face_clusters), 0);
  for (std::size_t i = 0; i < assign.size(); ++i) {
    const int c = assign.cluster_ids()[i];
    const auto& id = assign.ids()[i];
    const auto row = face_encodings.row_of(id);
    if (faceless && c == *faceless) {
      if (row) throw DataError("id '" + id + "' sits in the faceless cluster but has a face encoding");
      continue;
    }
    if (!row) throw DataError("id '" + id + "' is in face cluster " + std::to_string(c) +
                              " but has no face encoding");
    out.centroids.row(c) += face_encodings.values().row(*row);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < face_clusters; ++c) {
    out.centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return out;
}

int assign_unseen(const std::optional<Eigen::VectorXd>& encoding, const ClusteringSummary& model) {
  if (!encoding) {
    if (!model.faceless_cluster_id) {
      throw DataError("sample has no face encoding but the model has no faceless cluster");
    }
    return *model.faceless_cluster_id;
  }
  if (encoding->size() != model.centroids.cols()) {
    throw DataError("face encoding has dimension " + std::to_string(encoding->size()) +
                    ", model expects " + std::to_string(model.centroids.cols()));
  }
  if (model.centroids.rows() == 0) throw DataError("model has no face clusters");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
    const double d = (model.centroids.row(c).transpose() - *encoding).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace cdel
