#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "etgl/common.hpp"
#include "etgl/rng.hpp"

namespace etgl::nn {

enum class OutputActivation { identity, scaled_tanh };

struct Layer {
  Mat weight;  // out x in
  Vec bias;    // out
};

// Parameter-shaped container; also used for Adam moments.
struct Gradients {
  std::vector<Mat> weight;
  std::vector<Vec> bias;

  bool finite() const;
  double squared_norm() const;
  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
};

// Activations of a batched forward pass; columns are samples.
struct ForwardCache {
  Mat input;
  std::vector<Mat> pre;   // pre-activation per layer
  std::vector<Mat> post;  // activation per layer (last = network output)
};

// Feedforward MLP: ReLU hidden layers, identity or box-scaled tanh output.
class Network {
 public:
  Network() = default;

  // sizes = {input, hidden..., output}. Weights and biases are drawn from
  // U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
  Network(std::span<const int> sizes, OutputActivation activation, Rng& rng);

  Network(std::vector<Layer> layers, OutputActivation activation);

  // Output bounds for scaled_tanh: y = mid + half * tanh(z).
  void set_output_bounds(const Vec& low, const Vec& high);
  const Vec& output_mid() const { return out_mid_; }
  const Vec& output_half() const { return out_half_; }

  int input_dim() const;
  int output_dim() const;
  std::vector<int> sizes() const;
  OutputActivation output_activation() const { return activation_; }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Vec forward(const Vec& input) const;

  // Batched forward; input is input_dim x batch.
  Mat forward(const Mat& input, ForwardCache* cache = nullptr) const;

  // Gradients of sum(output .* upstream) with respect to the parameters
  // (summed over the batch) and, if requested, the inputs.
  Gradients backward(const ForwardCache& cache, const Mat& upstream, Mat* input_grad = nullptr,
                     bool parameter_grads = true) const;

  Gradients zero_gradients() const;
  bool same_architecture(const Network& other) const;
  bool finite() const;
  std::size_t parameter_count() const;

  // Flat parameter view in layer order (weights column-major, then bias).
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);

  // Output activation applied to a pre-activation block, and its derivative.
  Mat apply_output(const Mat& pre) const;
  Mat output_derivative(const Mat& pre) const;

 private:
  std::vector<Layer> layers_;
  OutputActivation activation_ = OutputActivation::identity;
  Vec out_mid_;
  Vec out_half_;
};

class Adam {
 public:
  Adam() = default;
  Adam(const Network& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  // Descent step: theta -= lr * mhat / (sqrt(vhat) + eps). Throws NumericError
  // (leaving net and state untouched) if grads contain NaN/Inf.
  void step(Network& net, const Gradients& grads);

  double learning_rate() const { return lr_; }
  std::int64_t step_count() const { return steps_; }
  const Gradients& first_moment() const { return m_; }
  const Gradients& second_moment() const { return v_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t steps_ = 0;
  Gradients m_;
  Gradients v_;
};

// target <- tau * source + (1 - tau) * target
void soft_update(Network& target, const Network& source, double tau);

}  // namespace etgl::nn
