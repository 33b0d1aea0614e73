#pragma once

#include <cstdint>
#include <string>

#include "cdel/network.hpp"

namespace oracle {

// A randomized small network plus one sample, covering every encoder/head option.
struct GradientCase {
  cdel::ModelParameters params;
  cdel::FeatureLayout layout;
  cdel::SampleFeatures sample;
  cdel::Label label = cdel::Label::negative;
  cdel::ClassPriors priors;
  double tau = 1.0;
  std::optional<Eigen::VectorXd> mask;
  std::string description;
};

GradientCase random_gradient_case(std::uint64_t seed);

struct GradientReport {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

// Backpropagated parameter gradient against central differences over every parameter.
GradientReport check_gradients(GradientCase& c, double h = 1e-5);

}  // namespace oracle
