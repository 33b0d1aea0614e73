#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "cdel/errors.hpp"
#include "cdel/validity.hpp"

using namespace cdel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Instance {
  EmbeddingMatrix emb;
  DistanceMatrix dm;
  ClusterAssignment assign;
};

Instance make(const Eigen::MatrixXd& p, const std::vector<int>& labels) {
  auto ids = oracle::make_ids(static_cast<int>(p.rows()));
  EmbeddingMatrix emb(ids, p);
  auto dm = pairwise_distances(emb);
  return {emb, dm, ClusterAssignment::from_raw_labels(ids, labels)};
}

ValidityScores row(double sc, double chs, double dbi, int c, std::optional<double> t = {}) {
  ValidityScores s;
  s.sc = sc;
  s.chs = chs;
  s.dbi = dbi;
  s.c = c;
  s.t = t;
  return s;
}

}  // namespace

TEST(Silhouette, FourPointExample) {
  Eigen::MatrixXd p(4, 2);
  p << 0, 0, 0, 1, 10, 0, 10, 1;
  const auto in = make(p, {0, 0, 1, 1});
  // a = 1, b = (10 + sqrt(101)) / 2 for every point.
  const double b = (10.0 + std::sqrt(101.0)) / 2.0;
  EXPECT_NEAR(silhouette_coefficient(in.dm, in.assign), (b - 1.0) / b, 1e-12);
  EXPECT_NEAR(silhouette_coefficient(in.dm, in.assign), 0.9002, 5e-5);
}

TEST(Silhouette, CollapsedClustersScoreOne) {
  Eigen::MatrixXd p(4, 1);
  p << 3, 3, 8, 8;
  const auto in = make(p, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(silhouette_coefficient(in.dm, in.assign), 1.0);
}

TEST(Indices, RequireTwoToNMinusOneClusters) {
  Eigen::MatrixXd p(3, 1);
  p << 0, 1, 2;
  const auto one = make(p, {0, 0, 0});
  EXPECT_THROW((void)silhouette_coefficient(one.dm, one.assign), DataError);
  EXPECT_THROW((void)calinski_harabasz_score(one.emb, one.assign), DataError);
  EXPECT_THROW((void)davies_bouldin_index(one.emb, one.assign), DataError);
  const auto all = make(p, {0, 1, 2});
  EXPECT_THROW((void)silhouette_coefficient(all.dm, all.assign), DataError);
}

TEST(CalinskiHarabasz, HandComputed) {
  Eigen::MatrixXd p(4, 1);
  p << 0, 2, 10, 12;
  const auto in = make(p, {0, 0, 1, 1});
  EXPECT_NEAR(calinski_harabasz_score(in.emb, in.assign), 50.0, 1e-12);
}

TEST(CalinskiHarabasz, GrowsWithSeparation) {
  double last = 0.0;
  for (double gap : {5.0, 10.0, 20.0}) {
    Eigen::MatrixXd p(4, 1);
    p << 0, 2, gap, gap + 2;
    const auto in = make(p, {0, 0, 1, 1});
    const double chs = calinski_harabasz_score(in.emb, in.assign);
    EXPECT_GT(chs, last);
    last = chs;
  }
}

TEST(CalinskiHarabasz, SaturatesToInfinityWithoutScatter) {
  Eigen::MatrixXd p(4, 1);
  p << 1, 1, 5, 5;
  const auto in = make(p, {0, 0, 1, 1});
  EXPECT_EQ(calinski_harabasz_score(in.emb, in.assign), kInf);
}

TEST(CalinskiHarabasz, NMinusOneWithDuplicatePair) {
  Eigen::MatrixXd p(4, 2);
  p << 0, 0, 0, 0, 3, 1, -2, 5;
  const auto in = make(p, {0, 0, 1, 2});
  // The duplicated pair has zero scatter and the singletons none at all: W = 0.
  EXPECT_EQ(calinski_harabasz_score(in.emb, in.assign), kInf);
  Eigen::MatrixXd q(4, 2);
  q << 0, 0, 0, 1, 3, 1, -2, 5;
  const auto jn = make(q, {0, 0, 1, 2});
  const oracle::Points pts{{0, 0}, {0, 1}, {3, 1}, {-2, 5}};
  EXPECT_NEAR(calinski_harabasz_score(jn.emb, jn.assign), oracle::calinski_harabasz(pts, {0, 0, 1, 2}), 1e-9);
}

TEST(DaviesBouldin, HandComputed) {
  Eigen::MatrixXd p(4, 1);
  p << 0, 2, 10, 12;
  const auto in = make(p, {0, 0, 1, 1});
  EXPECT_NEAR(davies_bouldin_index(in.emb, in.assign), 0.2, 1e-12);
  Eigen::MatrixXd q(4, 1);
  q << 1, 1, 6, 6;
  const auto jn = make(q, {0, 0, 1, 1});
  EXPECT_EQ(davies_bouldin_index(jn.emb, jn.assign), 0.0);
}

TEST(Indices, MatchBruteForceOnRandomInstance) {
  Rng rng(21);
  const auto pts = oracle::random_points(rng, 12, 3);
  std::vector<int> labels(12);
  for (int i = 0; i < 12; ++i) labels[i] = i % 3;
  const auto in = make(oracle::to_matrix(pts), labels);
  EXPECT_NEAR(silhouette_coefficient(in.dm, in.assign), oracle::silhouette(pts, labels), 1e-9);
  EXPECT_NEAR(calinski_harabasz_score(in.emb, in.assign), oracle::calinski_harabasz(pts, labels), 1e-9);
  EXPECT_NEAR(davies_bouldin_index(in.emb, in.assign), oracle::davies_bouldin(pts, labels), 1e-9);
}

TEST(Normalize, HandCases) {
  const std::vector<double> sc{0.140, 0.106, 0.110};
  const auto n = minmax_normalize(sc);
  EXPECT_DOUBLE_EQ(n[0], 1.0);
  EXPECT_DOUBLE_EQ(n[1], 0.0);
  EXPECT_NEAR(n[2], 0.1176, 5e-5);
  EXPECT_EQ(minmax_normalize(std::vector<double>{5.0}), std::vector<double>{0.0});
  EXPECT_EQ(minmax_normalize(std::vector<double>{2.0, 2.0}), (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW((void)minmax_normalize(std::vector<double>{}), DataError);
}

TEST(Normalize, AffineInvariant) {
  Rng rng(2);
  std::vector<double> x(9), y(9);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = 3.5 * x[i] - 7.0;
  }
  const auto a = minmax_normalize(x);
  const auto b = minmax_normalize(y);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Normalize, InfinityMapsToOne) {
  const auto n = minmax_normalize(std::vector<double>{1.0, kInf, 3.0});
  EXPECT_EQ(n, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(ComprehensiveIndicator, DominantCandidateScoresTwo) {
  const std::vector<ValidityScores> rows{row(0.5, 10, 0.3, 3), row(0.2, 4, 1.0, 4), row(0.1, 2, 0.8, 5)};
  const auto ci = comprehensive_indicator(rows);
  EXPECT_DOUBLE_EQ(ci[0], 2.0);
  EXPECT_THROW((void)comprehensive_indicator(std::vector<ValidityScores>{}), DataError);
}

TEST(Elbow, KneeOfSaturatingCurve) {
  const std::vector<CurvePoint> curve{{0, 0}, {1, 9}, {2, 10}, {3, 10.5}};
  EXPECT_DOUBLE_EQ(elbow_select(curve, Orientation::maximize), 1.0);
  // The same shape mirrored for a minimized indicator.
  const std::vector<CurvePoint> down{{0, 10.5}, {1, 1.5}, {2, 0.5}, {3, 0}};
  EXPECT_DOUBLE_EQ(elbow_select(down, Orientation::minimize), 1.0);
}

TEST(Elbow, FallbacksWithoutInterior) {
  const std::vector<CurvePoint> linear{{0.1, 1}, {0.2, 2}, {0.3, 3}};
  EXPECT_DOUBLE_EQ(elbow_select(linear, Orientation::maximize), 0.3);
  EXPECT_DOUBLE_EQ(elbow_select(linear, Orientation::minimize), 0.1);
  const std::vector<CurvePoint> two{{0.4, 5}, {0.5, 2}};
  EXPECT_DOUBLE_EQ(elbow_select(two, Orientation::maximize), 0.4);
  const std::vector<CurvePoint> flat{{0.4, 5}, {0.5, 5}, {0.6, 5}};
  EXPECT_DOUBLE_EQ(elbow_select(flat, Orientation::maximize), 0.4);
  const std::vector<CurvePoint> one{{0.7, 1}};
  EXPECT_DOUBLE_EQ(elbow_select(one, Orientation::minimize), 0.7);
  EXPECT_THROW((void)elbow_select(std::vector<CurvePoint>{}, Orientation::maximize), DataError);
  const std::vector<CurvePoint> unsorted{{0.5, 1}, {0.4, 2}};
  EXPECT_THROW((void)elbow_select(unsorted, Orientation::maximize), DataError);
}

TEST(Grid, MultiplesOfStepInsideRange) {
  const auto g = threshold_grid(0.27, 0.93);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_DOUBLE_EQ(g.front(), 0.3);
  EXPECT_DOUBLE_EQ(g.back(), 0.9);
  EXPECT_EQ(threshold_grid(0.0, 1.1).size(), 11u);
  EXPECT_TRUE(threshold_grid(0.31, 0.39).empty());
  EXPECT_EQ(threshold_grid(0.3, 0.3).size(), 1u);
}

TEST(Sweep, IdenticalEncodingsAreDegenerate) {
  const auto emb = EmbeddingMatrix(oracle::make_ids(4), Eigen::MatrixXd::Ones(4, 3));
  EXPECT_THROW((void)sweep_thresholds(pairwise_distances(emb), emb, Linkage::single), DataError);
}

TEST(Sweep, OrderIndependentOfThreads) {
  Rng rng(6);
  const auto emb = oracle::embedding(oracle::random_points(rng, 30, 2, 4));
  const auto dm = pairwise_distances(emb);
  const auto a = sweep_thresholds(dm, emb, Linkage::average, 1);
  const auto b = sweep_thresholds(dm, emb, Linkage::average, 4);
  ASSERT_EQ(a.scores.size(), b.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    EXPECT_EQ(*a.scores[i].t, *b.scores[i].t);
    EXPECT_EQ(a.scores[i].sc, b.scores[i].sc);
    EXPECT_EQ(a.scores[i].c, b.scores[i].c);
  }
  ASSERT_FALSE(a.scores.empty());
  for (std::size_t i = 1; i < a.scores.size(); ++i) EXPECT_LT(*a.scores[i - 1].t, *a.scores[i].t);
  // Each candidate is the flat clustering at its t.
  for (const auto& s : a.scores) {
    EXPECT_EQ(s.c, hierarchical_flat_clusters(dm, Linkage::average, *s.t).cluster_count());
  }
}

TEST(Sweep, ExcludesOutOfRangeClusterCounts) {
  Eigen::MatrixXd p(4, 1);
  p << 0, 0.05, 3, 3.05;
  const auto emb = EmbeddingMatrix(oracle::make_ids(4), p);
  const auto s = sweep_thresholds(pairwise_distances(emb), emb, Linkage::single);
  for (const auto& v : s.scores) EXPECT_EQ(v.c, 2);
  for (const auto& e : s.excluded) EXPECT_EQ(e.c, 1);
  EXPECT_FALSE(s.excluded.empty());
}

TEST(Selection, SingleSurvivorIsTheOptimum) {
  SweepResult s;
  s.scores = {row(0.3, 5, 0.9, 4, 0.5)};
  const auto r = select_optimal_threshold(s);
  EXPECT_DOUBLE_EQ(r.t_op, 0.5);
  EXPECT_EQ(r.c_op, 4);
  EXPECT_THROW((void)select_optimal_threshold(SweepResult{}), DataError);
}

TEST(Selection, EqualCiGoesToSmallerT) {
  const std::array<ValidityScores, 3> picks{row(0.3, 5, 0.9, 4, 0.9), row(0.3, 5, 0.9, 6, 0.2),
                                            row(0.3, 5, 0.9, 8, 0.6)};
  const auto r = select_from_picks(picks);
  EXPECT_DOUBLE_EQ(r.t_op, 0.2);
  EXPECT_EQ(r.c_op, 6);
}

TEST(Selection, PicksFollowEachIndicatorsElbow) {
  SweepResult s;
  // SC: knee at 0.2; CHS: knee at 0.3; DBI (minimize): knee at 0.2.
  s.scores = {row(0.0, 0, 1.0, 9, 0.1), row(0.9, 1, 0.1, 8, 0.2), row(0.95, 9, 0.05, 7, 0.3),
              row(1.0, 10, 0.0, 6, 0.4)};
  const auto r = select_optimal_threshold(s);
  EXPECT_DOUBLE_EQ(r.picks_t[0], 0.2);
  EXPECT_DOUBLE_EQ(r.picks_t[1], 0.3);
  EXPECT_DOUBLE_EQ(r.picks_t[2], 0.2);
}

TEST(AlgorithmChoice, SingleRunAndTies) {
  const std::vector<AlgorithmRun> one{{Algorithm::spectral, row(0.1, 1, 1, 3)}};
  EXPECT_EQ(select_algorithm(one), Algorithm::spectral);
  const std::vector<AlgorithmRun> tied{{Algorithm::spectral, row(0.1, 1, 1, 3)},
                                       {Algorithm::kmeans, row(0.1, 1, 1, 3)}};
  EXPECT_EQ(select_algorithm(tied), Algorithm::kmeans);
  EXPECT_EQ(parse_algorithm("hierarchical"), Algorithm::hierarchical);
  EXPECT_FALSE(parse_algorithm("dbscan"));
}
