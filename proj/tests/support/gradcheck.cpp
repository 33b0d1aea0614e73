#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "cdel/random.hpp"

namespace oracle {

GradientCase random_gradient_case(std::uint64_t seed) {
  cdel::Rng rng(seed);
  GradientCase c;
  std::ostringstream what;

  const bool toy_text = rng.uniform() < 0.6;
  if (toy_text) {
    cdel::TextEncoderConfig tc{8 + static_cast<int>(rng.index(9)), 2 + static_cast<int>(rng.index(4)),
                               2 + static_cast<int>(rng.index(5))};
    c.params.text = cdel::TextEncoderParams::initialize(tc, rng.next());
    // Larger weights than the default init exercise the tanh curvature.
    c.params.text->w_state *= 2.0;
    c.layout.text_dim = tc.state_dim;
    const auto len = rng.index(5);
    for (std::uint64_t i = 0; i < len; ++i) c.sample.tokens.push_back(static_cast<int>(rng.index(tc.hash_width)));
    what << "toy text (state " << tc.state_dim << ", " << len << " tokens)";
  } else {
    c.layout.text_dim = 1 + static_cast<Eigen::Index>(rng.index(5));
    c.sample.text = Eigen::VectorXd(c.layout.text_dim);
    for (Eigen::Index i = 0; i < c.layout.text_dim; ++i) c.sample.text(i) = rng.normal();
    what << "precomputed text " << c.layout.text_dim;
  }

  const auto image_in = static_cast<Eigen::Index>(rng.index(5));
  if (image_in > 0) {
    c.sample.image = Eigen::VectorXd(image_in);
    for (Eigen::Index i = 0; i < image_in; ++i) c.sample.image(i) = rng.normal();
    if (rng.uniform() < 0.5) {
      const auto out = 1 + static_cast<Eigen::Index>(rng.index(4));
      c.params.image = cdel::ImageProjectionParams::initialize(image_in, out, rng.next());
      c.layout.image_dim = out;
      what << ", image projection " << image_in << "->" << out;
    } else {
      c.layout.image_dim = image_in;
      what << ", image passthrough " << image_in;
    }
  }

  if (rng.uniform() < 0.7) {
    c.layout.cluster_dim = 1 + static_cast<Eigen::Index>(rng.index(5));
    c.sample.cluster = static_cast<int>(rng.index(static_cast<std::uint64_t>(c.layout.cluster_dim)));
    what << ", " << c.layout.cluster_dim << " clusters";
  }

  const auto activation = rng.uniform() < 0.7 ? cdel::Activation::softmax : cdel::Activation::sigmoid;
  c.params.head = cdel::ClassifierHead::initialize(c.layout.total(), 3, activation, rng.next());
  for (Eigen::Index i = 0; i < c.params.head.bias.size(); ++i) c.params.head.bias(i) = 0.3 * rng.normal();

  std::array<double, 3> p{};
  double sum = 0.0;
  for (auto& v : p) sum += v = 0.05 + rng.uniform();
  for (auto& v : p) v /= sum;
  p[2] = 1.0 - p[0] - p[1];
  c.priors = cdel::ClassPriors(p);
  c.tau = rng.uniform(0.0, 2.0);
  c.label = cdel::label_at(rng.index(3));

  if (rng.uniform() < 0.4) {
    Eigen::VectorXd m(c.layout.total());
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform() < 0.3 ? 0.0 : 1.0 / 0.7;
    c.mask = m;
    what << ", dropout mask";
  }
  what << ", " << cdel::activation_name(activation) << ", tau " << c.tau;
  c.description = what.str();
  return c;
}

GradientReport check_gradients(GradientCase& c, double h) {
  const Eigen::VectorXd* mask = c.mask ? &*c.mask : nullptr;
  cdel::ModelParameters grads = c.params.zeros_like();
  (void)cdel::sample_loss(c.params, c.layout, c.sample, c.label, c.priors, c.tau, mask, &grads);

  auto loss = [&] { return cdel::sample_loss(c.params, c.layout, c.sample, c.label, c.priors, c.tau, mask); };
  GradientReport report;
  auto tensors = c.params.tensors();
  const auto analytic = std::as_const(grads).tensors();
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    for (std::size_t i = 0; i < tensors[t].size(); ++i) {
      double& x = tensors[t][i];
      const double saved = x;
      x = saved + h;
      const double up = loss();
      x = saved - h;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[t][i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      // Components that are zero up to difference noise are compared absolutely.
      const double err = scale < 1e-7 ? std::abs(a - numeric) : std::abs(a - numeric) / scale;
      report.max_relative_error = std::max(report.max_relative_error, err);
      ++report.coordinates;
    }
  }
  return report;
}

}  // namespace oracle
