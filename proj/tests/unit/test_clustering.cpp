#include <algorithm>
#include <limits>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "cdel/clustering.hpp"
#include "cdel/errors.hpp"

using namespace cdel;

namespace {

EmbeddingMatrix line(std::vector<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
  return EmbeddingMatrix(oracle::make_ids(static_cast<int>(xs.size())), m);
}

std::vector<int> partition(const ClusterAssignment& a) { return oracle::canonical(a.cluster_ids()); }

}  // namespace

TEST(Distances, HandCases) {
  Eigen::MatrixXd p(2, 2);
  p << 0, 0, 3, 4;
  const auto dm = pairwise_distances(EmbeddingMatrix({"a", "b"}, p));
  EXPECT_DOUBLE_EQ(dm(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(dm(1, 0), 5.0);
  EXPECT_DOUBLE_EQ(dm.min_off_diagonal(), 5.0);

  Eigen::MatrixXd same(2, 3);
  same << 1, 2, 3, 1, 2, 3;
  EXPECT_EQ(pairwise_distances(EmbeddingMatrix({"a", "b"}, same))(0, 1), 0.0);
  EXPECT_THROW((void)pairwise_distances(EmbeddingMatrix({"a"}, Eigen::MatrixXd::Zero(1, 2))), DataError);
}

TEST(Distances, MatchDoubleLoop) {
  Rng rng(3);
  const auto pts = oracle::random_points(rng, 6, 8);
  const auto dm = pairwise_distances(oracle::embedding(pts));
  const auto ref = oracle::distance_table(pts);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(dm(i, i), 0.0);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(dm(i, j), ref[i][j], 1e-12);
  }
}

TEST(DistanceMatrixType, RejectsAsymmetry) {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 2, 0;
  EXPECT_THROW(DistanceMatrix({"a", "b"}, d), DataError);
  d << 1, 1, 1, 0;
  EXPECT_THROW(DistanceMatrix({"a", "b"}, d), DataError);
}

TEST(Hierarchical, OneDimensionalExample) {
  const auto dm = pairwise_distances(line({0, 1, 10}));
  const auto a = hierarchical_flat_clusters(dm, Linkage::single, 5.0);
  EXPECT_EQ(a.cluster_count(), 2);
  EXPECT_EQ(a.cluster_ids(), (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(hierarchical_flat_clusters(dm, Linkage::single, 0.5).cluster_count(), 3);
  EXPECT_EQ(hierarchical_flat_clusters(dm, Linkage::single, 20.0).cluster_count(), 1);
  EXPECT_THROW((void)hierarchical_flat_clusters(dm, Linkage::single, 0.0), ConfigError);
}

TEST(Hierarchical, MergeHeightsPerLinkage) {
  const auto dm = pairwise_distances(line({0, 1, 10}));
  // {0,1} at 1, then {0,1}+{10}: single 9, complete 10, average 9.5.
  const std::array<std::pair<Linkage, double>, 3> expected{
      {{Linkage::single, 9.0}, {Linkage::complete, 10.0}, {Linkage::average, 9.5}}};
  for (auto [linkage, height] : expected) {
    const auto tree = build_linkage(dm, linkage);
    ASSERT_EQ(tree.merges().size(), 2u);
    EXPECT_DOUBLE_EQ(tree.merges()[0].height, 1.0);
    EXPECT_DOUBLE_EQ(tree.merges()[1].height, height) << linkage_name(linkage);
    EXPECT_EQ(tree.merges()[1].size, 3);
  }
}

TEST(Hierarchical, BoundaryHeightIsInclusive) {
  const auto dm = pairwise_distances(line({0, 1, 10}));
  EXPECT_EQ(hierarchical_flat_clusters(dm, Linkage::single, 1.0).cluster_count(), 2);
  EXPECT_EQ(hierarchical_flat_clusters(dm, Linkage::single, 9.0).cluster_count(), 1);
}

TEST(Hierarchical, MatchesNaiveOracleOnRandomInstances) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(14));
    const auto pts = oracle::random_points(rng, n, 3, trial % 3);
    const auto dm = pairwise_distances(oracle::embedding(pts));
    const auto d = oracle::distance_table(pts);
    for (Linkage l : {Linkage::single, Linkage::complete, Linkage::average}) {
      const auto tree = build_linkage(dm, l);
      for (int k = 0; k < 6; ++k) {
        const double t = rng.uniform(0.01, 1.2) * dm.max_off_diagonal();
        EXPECT_EQ(oracle::canonical(tree.cut(t)), oracle::agglomerate(d, l, t)) << "trial " << trial;
      }
    }
  }
}

TEST(Hierarchical, ClusterCountIsMonotoneInT) {
  Rng rng(5);
  const auto pts = oracle::random_points(rng, 25, 4, 3);
  const auto tree = build_linkage(pairwise_distances(oracle::embedding(pts)), Linkage::average);
  int last = std::numeric_limits<int>::max();
  for (double t = 0.05; t < 20.0; t += 0.05) {
    const auto labels = tree.cut(t);
    const int c = *std::max_element(labels.begin(), labels.end()) + 1;
    EXPECT_LE(c, last);
    last = c;
  }
  EXPECT_EQ(last, 1);
}

TEST(Hierarchical, DuplicatePointsShareACluster) {
  const auto dm = pairwise_distances(line({2, 2, 2, 7}));
  const auto a = hierarchical_flat_clusters(dm, Linkage::complete, 0.1);
  EXPECT_EQ(a.cluster_ids(), (std::vector<int>{0, 0, 0, 1}));
}

TEST(KMeans, OneDimensionalMatchesExhaustiveOptimum) {
  const std::vector<double> xs{0, 1, 10, 11};
  const auto r = kmeans(line(xs), 2, 1);
  // Every 2-partition of 4 points, scored by inertia.
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_labels;
  for (unsigned mask = 1; mask < 15; ++mask) {
    std::vector<int> labels(4);
    double sum[2] = {0, 0}, cnt[2] = {0, 0};
    for (int i = 0; i < 4; ++i) {
      labels[i] = (mask >> i) & 1;
      sum[labels[i]] += xs[i];
      ++cnt[labels[i]];
    }
    double inertia = 0.0;
    for (int i = 0; i < 4; ++i) inertia += std::pow(xs[i] - sum[labels[i]] / cnt[labels[i]], 2);
    if (inertia < best) {
      best = inertia;
      best_labels = oracle::canonical(labels);
    }
  }
  EXPECT_EQ(partition(r.assignment), best_labels);
  EXPECT_NEAR(r.inertia, best, 1e-12);
  std::vector<double> cents{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(cents.begin(), cents.end());
  EXPECT_DOUBLE_EQ(cents[0], 0.5);
  EXPECT_DOUBLE_EQ(cents[1], 10.5);
  EXPECT_TRUE(r.converged);
}

TEST(KMeans, DegenerateK) {
  const auto e = line({3, 1, 4, 1.5, 9});
  const auto all = kmeans(e, 5, 2);
  EXPECT_EQ(all.assignment.cluster_count(), 5);
  EXPECT_EQ(all.inertia, 0.0);
  const auto one = kmeans(e, 1, 2);
  EXPECT_EQ(one.assignment.cluster_count(), 1);
  EXPECT_DOUBLE_EQ(one.centroids(0, 0), (3 + 1 + 4 + 1.5 + 9) / 5.0);
  EXPECT_THROW((void)kmeans(e, 6, 2), ConfigError);
  EXPECT_THROW((void)kmeans(e, 0, 2), ConfigError);
}

TEST(KMeans, SameSeedSameResult) {
  Rng rng(8);
  const auto e = oracle::embedding(oracle::random_points(rng, 40, 5, 4));
  const auto a = kmeans(e, 4, 99);
  const auto b = kmeans(e, 4, 99);
  EXPECT_EQ(a.assignment.cluster_ids(), b.assignment.cluster_ids());
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, DuplicatePointsCanYieldFewerClusters) {
  const auto r = kmeans(line({1, 1, 1, 1}), 3, 0);
  EXPECT_EQ(r.assignment.cluster_count(), 1);
}

TEST(Spectral, SeparatesFarBlobs) {
  Rng rng(4);
  Eigen::MatrixXd p(10, 2);
  for (int i = 0; i < 10; ++i) {
    const double base = i < 5 ? 0.0 : 50.0;
    p(i, 0) = base + 0.1 * rng.normal();
    p(i, 1) = base + 0.1 * rng.normal();
  }
  const auto a = spectral_cluster(EmbeddingMatrix(oracle::make_ids(10), p), 2, 1.0, 3);
  EXPECT_EQ(partition(a), (std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
}

TEST(Spectral, ForcedPartitions) {
  const auto e = line({0, 1, 2});
  EXPECT_EQ(spectral_cluster(e, 3, 1.0, 0).cluster_count(), 3);
  for (double gamma : {0.01, 1.0, 100.0}) {
    EXPECT_EQ(spectral_cluster(line({0, 5}), 2, gamma, 0).cluster_count(), 2);
  }
  EXPECT_THROW((void)spectral_cluster(e, 1, 1.0, 0), ConfigError);
  EXPECT_THROW((void)spectral_cluster(e, 2, 0.0, 0), ConfigError);
}

TEST(Spectral, IsolatedPointIsANumericError) {
  // exp(-gamma d^2) underflows to 0 for the far point: zero degree.
  EXPECT_THROW((void)spectral_cluster(line({0, 0.1, 0.2, 1e6}), 2, 1.0, 0), NumericError);
}

TEST(Faceless, AttachesOneSharedCluster) {
  const ClusterAssignment base({"a", "b", "c"}, {0, 1, 2});
  const std::vector<std::string> faceless{"x", "y"};
  const auto a = attach_faceless_cluster(base, faceless);
  EXPECT_EQ(a.cluster_count(), 4);
  EXPECT_EQ(a.cluster_of("x"), 3);
  EXPECT_EQ(a.cluster_of("y"), 3);
  EXPECT_EQ(a.faceless_cluster_id(), 3);

  const auto same = attach_faceless_cluster(base, {});
  EXPECT_EQ(same.cluster_ids(), base.cluster_ids());
  EXPECT_FALSE(same.faceless_cluster_id());

  const auto only = attach_faceless_cluster(ClusterAssignment(), faceless);
  EXPECT_EQ(only.cluster_count(), 1);
  EXPECT_EQ(only.cluster_sizes(), (std::vector<std::size_t>{2}));

  const std::vector<std::string> clash{"a"};
  EXPECT_THROW((void)attach_faceless_cluster(base, clash), DataError);
}

TEST(Unseen, NearestCentroidWithTieToLowerId) {
  ClusteringSummary s;
  s.centroids = Eigen::MatrixXd::Zero(6, 1);
  for (int c = 0; c < 6; ++c) s.centroids(c, 0) = 10.0 * c;
  s.centroids(2, 0) = -4.0;
  s.centroids(5, 0) = 4.0;
  s.faceless_cluster_id = 6;
  EXPECT_EQ(assign_unseen(std::nullopt, s), 6);
  EXPECT_EQ(assign_unseen(Eigen::VectorXd::Constant(1, 30.0), s), 3);
  EXPECT_EQ(assign_unseen(Eigen::VectorXd::Zero(1), s), 0);
  s.centroids(0, 0) = 100.0;
  EXPECT_EQ(assign_unseen(Eigen::VectorXd::Zero(1), s), 2);  // equidistant from 2 and 5

  s.faceless_cluster_id.reset();
  EXPECT_THROW((void)assign_unseen(std::nullopt, s), DataError);
  EXPECT_THROW((void)assign_unseen(Eigen::VectorXd::Zero(2), s), DataError);
}

TEST(Unseen, SummaryFitUsesFaceClusterMeans) {
  const EmbeddingMatrix enc({"a", "b", "c"}, (Eigen::MatrixXd(3, 1) << 0, 2, 10).finished());
  const auto assign = attach_faceless_cluster(ClusterAssignment({"a", "b", "c"}, {0, 0, 1}),
                                              std::vector<std::string>{"f"});
  const auto s = ClusteringSummary::fit(assign, enc);
  EXPECT_EQ(s.face_cluster_count(), 2);
  EXPECT_EQ(s.total_clusters(), 3);
  EXPECT_DOUBLE_EQ(s.centroids(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.centroids(1, 0), 10.0);
  EXPECT_EQ(s.faceless_cluster_id, 2);
}
