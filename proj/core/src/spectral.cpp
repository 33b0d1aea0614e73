#include <cmath>

#include "cdel/clustering.hpp"
#include "cdel/errors.hpp"

namespace cdel {

ClusterAssignment spectral_cluster(const EmbeddingMatrix& emb, int k, double gamma, std::uint64_t seed) {
  const Eigen::Index n = emb.rows();
  if (k < 2 || k > n) {
    throw ConfigError("spectral clustering needs 2 <= k <= n, got k = " + std::to_string(k) +
                      ", n = " + std::to_string(n));
  }
  if (!(gamma > 0.0)) throw ConfigError("spectral gamma must be > 0, got " + std::to_string(gamma));
  if (k == n) {
    std::vector<int> singletons(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) singletons[static_cast<std::size_t>(i)] = static_cast<int>(i);
    return ClusterAssignment(emb.ids(), std::move(singletons));
  }

  const Eigen::MatrixXd& x = emb.values();
  Eigen::MatrixXd affinity = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = std::exp(-gamma * (x.row(i) - x.row(j)).squaredNorm());
      affinity(i, j) = a;
      affinity(j, i) = a;
    }
  }
  const Eigen::VectorXd degree = affinity.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(degree(i) > 0.0)) {
      throw NumericError("spectral clustering: sample '" + emb.ids()[static_cast<std::size_t>(i)] +
                         "' has zero affinity to every other sample (gamma = " + std::to_string(gamma) +
                         "); the normalized Laplacian is undefined");
    }
  }
  const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  Eigen::MatrixXd laplacian = -(inv_sqrt.asDiagonal() * affinity * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw NumericError("spectral clustering: eigendecomposition of the " + std::to_string(n) + "x" +
                       std::to_string(n) + " Laplacian did not converge");
  }
  // Eigenvalues come back ascending.
  Eigen::MatrixXd rows = solver.eigenvectors().leftCols(k);
  if (!rows.allFinite()) throw NumericError("spectral clustering: non-finite eigenvectors");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return kmeans(rows, emb.ids(), k, seed).assignment;
}

}  // namespace cdel
