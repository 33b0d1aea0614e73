#pragma once

// Slow, definitional reference implementations used to check the library.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdel/clustering.hpp"
#include "cdel/random.hpp"
#include "cdel/types.hpp"

namespace oracle {

// Rows of `points`, row-major, in a plain nested vector.
using Points = std::vector<std::vector<double>>;

Points random_points(cdel::Rng& rng, int n, int dim, int blobs = 0);
Eigen::MatrixXd to_matrix(const Points& p);
std::vector<std::string> make_ids(int n, const std::string& prefix = "s");
cdel::EmbeddingMatrix embedding(const Points& p, const std::string& prefix = "s");

double euclid(const std::vector<double>& a, const std::vector<double>& b);
std::vector<std::vector<double>> distance_table(const Points& p);

// Agglomerate from singletons, always merging the closest pair under the
// point-level linkage definition, while that distance is <= t. O(n^3) per merge.
std::vector<int> agglomerate(const std::vector<std::vector<double>>& d, cdel::Linkage linkage, double t);

// Relabel by first appearance so partitions compare with ==.
std::vector<int> canonical(const std::vector<int>& labels);

double silhouette(const Points& p, const std::vector<int>& labels);
double calinski_harabasz(const Points& p, const std::vector<int>& labels);
double davies_bouldin(const Points& p, const std::vector<int>& labels);

// Central difference of `f` along every coordinate of `x` (modified in place and restored).
std::vector<double> numeric_gradient(std::vector<double*> coords, const std::function<double()>& f, double h);

double relative_error(double a, double b);

// Samples with labels drawn at the given class fractions and Gaussian features
// whose class means sit `separation` apart along one axis per class.
struct LabeledBlobs {
  cdel::SampleTable samples;
  cdel::EmbeddingMatrix features;
};
LabeledBlobs labeled_blobs(int n, const std::array<double, cdel::kNumClasses>& fractions, int dim,
                           double separation, double noise, std::uint64_t seed, const std::string& prefix = "x");

}  // namespace oracle
