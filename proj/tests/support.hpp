#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "etgl/nn.hpp"
#include "etgl/rng.hpp"

namespace testing {

inline etgl::nn::Network random_net(const std::vector<int>& sizes, etgl::Rng& rng,
                                    etgl::nn::OutputActivation act = etgl::nn::OutputActivation::identity) {
  return etgl::nn::Network(sizes, act, rng);
}

inline etgl::Mat random_matrix(int rows, int cols, etgl::Rng& rng, double scale = 1.0) {
  etgl::Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

// Smallest |pre-activation| over hidden layers; finite differences are only
// meaningful away from ReLU kinks.
inline double min_hidden_margin(const etgl::nn::ForwardCache& cache) {
  double m = 1e300;
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) m = std::min(m, cache.pre[l].cwiseAbs().minCoeff());
  return m;
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-9) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

// Central differences of f over every flat parameter of net.
inline std::vector<double> finite_difference(etgl::nn::Network& net, const std::function<double()>& f,
                                             double h = 1e-5) {
  auto params = net.flat_parameters();
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    net.set_flat_parameters(params);
    const double up = f();
    params[i] = keep - h;
    net.set_flat_parameters(params);
    const double down = f();
    params[i] = keep;
    out[i] = (up - down) / (2 * h);
  }
  net.set_flat_parameters(params);
  return out;
}

// Flattens gradients in the same order as Network::flat_parameters.
inline std::vector<double> flatten(const etgl::nn::Gradients& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    out.insert(out.end(), g.weight[l].data(), g.weight[l].data() + g.weight[l].size());
    out.insert(out.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
  }
  return out;
}

}  // namespace testing
