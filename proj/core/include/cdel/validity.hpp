#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cdel/clustering.hpp"
#include "cdel/types.hpp"

namespace cdel {

// Internal validity of one partition. CHS and DBI are +infinity when the
// partition saturates them (zero within-cluster scatter, coincident centroids).
struct ValidityScores {
  double sc = 0.0;
  double chs = 0.0;
  double dbi = 0.0;
  int c = 0;
  std::optional<double> t;
};

// All three indices require 2 <= c <= n-1 and throw DataError otherwise.
[[nodiscard]] double silhouette_coefficient(const DistanceMatrix& dm, const ClusterAssignment& assign);
[[nodiscard]] double calinski_harabasz_score(const EmbeddingMatrix& emb, const ClusterAssignment& assign);
[[nodiscard]] double davies_bouldin_index(const EmbeddingMatrix& emb, const ClusterAssignment& assign);

// Same indices over row-aligned dense labels in [0, c).
[[nodiscard]] double silhouette_from_labels(const Eigen::MatrixXd& distances, std::span<const int> labels,
                                            int c);
[[nodiscard]] double calinski_harabasz_from_labels(const Eigen::MatrixXd& points,
                                                   std::span<const int> labels, int c);
[[nodiscard]] double davies_bouldin_from_labels(const Eigen::MatrixXd& points, std::span<const int> labels,
                                                int c);

[[nodiscard]] ValidityScores score_partition(const DistanceMatrix& dm, const EmbeddingMatrix& emb,
                                             const ClusterAssignment& assign);

// (x - min) / (max - min); all zeros when max == min. +infinity entries map to 1
// and every finite entry of such a column to 0.
[[nodiscard]] std::vector<double> minmax_normalize(std::span<const double> values);

// SC_N + CHS_N - DBI_N, each column normalized across `candidates`.
[[nodiscard]] std::vector<double> comprehensive_indicator(std::span<const ValidityScores> candidates);

enum class Orientation { maximize, minimize };

struct CurvePoint {
  double t;
  double value;
};

// Knee of a curve sorted by strictly increasing t: the point lying farthest on
// the "better" side of the chord joining the endpoints. A curve with no point
// above the chord yields the better endpoint.
[[nodiscard]] double elbow_select(std::span<const CurvePoint> curve, Orientation orientation);

struct ExcludedCandidate {
  double t;
  int c;
  std::string reason;
};

struct SweepResult {
  Linkage linkage = Linkage::single;
  std::vector<ValidityScores> scores;     // scored candidates, increasing t
  std::vector<ExcludedCandidate> excluded;  // increasing t
  double t_min = 0.0;
  double t_max = 0.0;
};

inline constexpr double kThresholdStep = 0.1;

// Multiples of 0.1 inside [t_min, t_max], excluding 0.
[[nodiscard]] std::vector<double> threshold_grid(double t_min, double t_max);

// threads == 0 uses the hardware concurrency. Output order never depends on it.
[[nodiscard]] SweepResult sweep_thresholds(const DistanceMatrix& dm, const EmbeddingMatrix& emb,
                                           Linkage linkage, unsigned threads = 0);

struct SelectionReport {
  std::array<double, 3> picks_t{};  // t1 (SC), t2 (CHS), t3 (DBI)
  std::array<ValidityScores, 3> picks{};
  std::array<double, 3> ci{};
  double t_op = 0.0;
  int c_op = 0;
};

// Elbow pick per indicator, then the comprehensive indicator over the picks.
[[nodiscard]] SelectionReport select_optimal_threshold(const SweepResult& sweep);

// The comprehensive-indicator step alone, over already chosen per-indicator picks.
[[nodiscard]] SelectionReport select_from_picks(const std::array<ValidityScores, 3>& picks);

enum class Algorithm { hierarchical, kmeans, spectral };

[[nodiscard]] std::string_view algorithm_name(Algorithm a) noexcept;
[[nodiscard]] std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept;

struct AlgorithmRun {
  Algorithm algorithm;
  ValidityScores scores;
};

// argmax CI across runs; ties go to the earlier of hierarchical, kmeans, spectral.
[[nodiscard]] Algorithm select_algorithm(std::span<const AlgorithmRun> runs);

}  // namespace cdel
