#include "etgl/nn.hpp"

#include <cmath>

#include "etgl/nn_kernels.hpp"

namespace etgl::nn {

bool Gradients::finite() const {
  for (const auto& w : weight)
    if (!w.allFinite()) return false;
  for (const auto& b : bias)
    if (!b.allFinite()) return false;
  return true;
}

double Gradients::squared_norm() const {
  double total = 0.0;
  for (const auto& w : weight) total += w.squaredNorm();
  for (const auto& b : bias) total += b.squaredNorm();
  return total;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  require(weight.size() == other.weight.size(), "Gradients: layer count mismatch");
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += other.weight[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (auto& w : weight) w *= scale;
  for (auto& b : bias) b *= scale;
  return *this;
}

Network::Network(std::span<const int> sizes, OutputActivation activation, Rng& rng)
    : activation_(activation) {
  require(sizes.size() >= 2, "Network: need at least input and output sizes");
  for (int s : sizes) require(s > 0, "Network: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Layer layer{Mat(out, in), Vec(out)};
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r) layer.weight(r, c) = rng.uniform(-bound, bound);
    for (int r = 0; r < out; ++r) layer.bias(r) = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
  }
  out_mid_ = Vec::Zero(output_dim());
  out_half_ = Vec::Ones(output_dim());
}

Network::Network(std::vector<Layer> layers, OutputActivation activation)
    : layers_(std::move(layers)), activation_(activation) {
  require(!layers_.empty(), "Network: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    require(layers_[l].bias.size() == layers_[l].weight.rows(), "Network: bias/weight mismatch");
    if (l > 0)
      require(layers_[l].weight.cols() == layers_[l - 1].weight.rows(),
              "Network: layer shapes do not chain");
  }
  out_mid_ = Vec::Zero(output_dim());
  out_half_ = Vec::Ones(output_dim());
}

void Network::set_output_bounds(const Vec& low, const Vec& high) {
  require(low.size() == output_dim() && high.size() == output_dim(),
          "Network: output bound dimension mismatch");
  require(((high - low).array() > 0).all(), "Network: empty output box");
  out_mid_ = 0.5 * (low + high);
  out_half_ = 0.5 * (high - low);
}

int Network::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Network::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::vector<int> Network::sizes() const {
  std::vector<int> s;
  if (layers_.empty()) return s;
  s.push_back(input_dim());
  for (const auto& l : layers_) s.push_back(static_cast<int>(l.weight.rows()));
  return s;
}

Vec Network::forward(const Vec& input) const {
  require(input.size() == input_dim(), "Network::forward: input dimension mismatch");
  Vec x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vec z = layers_[l].weight * x + layers_[l].bias;
    if (l + 1 < layers_.size()) {
      x = z.cwiseMax(0.0);
    } else {
      x = apply_output(z);
    }
  }
  return x;
}

Mat Network::forward(const Mat& input, ForwardCache* cache) const {
  return kernels::forward_parallel(*this, input, cache);
}

Gradients Network::backward(const ForwardCache& cache, const Mat& upstream, Mat* input_grad,
                            bool parameter_grads) const {
  return kernels::backward_parallel(*this, cache, upstream, input_grad, parameter_grads);
}

Mat Network::apply_output(const Mat& pre) const {
  if (activation_ == OutputActivation::identity) return pre;
  Mat out = pre.array().tanh().matrix();
  out.array().colwise() *= out_half_.array();
  out.colwise() += out_mid_;
  return out;
}

Mat Network::output_derivative(const Mat& pre) const {
  if (activation_ == OutputActivation::identity) return Mat::Ones(pre.rows(), pre.cols());
  Mat t = pre.array().tanh().matrix();
  Mat d = (1.0 - t.array().square()).matrix();
  d.array().colwise() *= out_half_.array();
  return d;
}

Gradients Network::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weight.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vec::Zero(l.bias.size()));
  }
  return g;
}

bool Network::same_architecture(const Network& other) const {
  return sizes() == other.sizes() && activation_ == other.activation_;
}

bool Network::finite() const {
  for (const auto& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

void Network::set_flat_parameters(std::span<const double> values) {
  require(values.size() == parameter_count(), "Network: flat parameter size mismatch");
  std::size_t offset = 0;
  for (auto& l : layers_) {
    std::copy_n(values.begin() + offset, l.weight.size(), l.weight.data());
    offset += l.weight.size();
    std::copy_n(values.begin() + offset, l.bias.size(), l.bias.data());
    offset += l.bias.size();
  }
}

Adam::Adam(const Network& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  require(learning_rate > 0.0, "Adam: learning rate must be positive");
  m_ = net.zero_gradients();
  v_ = net.zero_gradients();
}

void Adam::step(Network& net, const Gradients& grads) {
  require(grads.weight.size() == net.layers().size(), "Adam: gradient/network mismatch");
  if (!grads.finite()) throw NumericError("Adam: non-finite gradient, step rejected");
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, m_.weight[l], v_.weight[l], grads.weight[l]);
    update(layers[l].bias, m_.bias[l], v_.bias[l], grads.bias[l]);
  }
}

void soft_update(Network& target, const Network& source, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "soft_update: tau outside [0,1]");
  require(target.same_architecture(source), "soft_update: architecture mismatch");
  auto& t = target.layers();
  const auto& s = source.layers();
  for (std::size_t l = 0; l < t.size(); ++l) {
    if (tau == 1.0) {
      t[l].weight = s[l].weight;
      t[l].bias = s[l].bias;
    } else {
      t[l].weight = tau * s[l].weight + (1.0 - tau) * t[l].weight;
      t[l].bias = tau * s[l].bias + (1.0 - tau) * t[l].bias;
    }
  }
}

}  // namespace etgl::nn
