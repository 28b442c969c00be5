#include "etgl/nn_kernels.hpp"

#include <algorithm>
#include <vector>

namespace etgl::nn::kernels {

namespace {

void check_input(const Network& net, const Mat& input) {
  require(!net.layers().empty(), "forward: empty network");
  require(input.rows() == net.input_dim(), "forward: input dimension mismatch");
}

void check_backward(const Network& net, const ForwardCache& cache, const Mat& upstream) {
  const auto n_layers = net.layers().size();
  require(cache.pre.size() == n_layers && cache.post.size() == n_layers,
          "backward: cache does not match network");
  require(upstream.rows() == net.output_dim() && upstream.cols() == cache.input.cols(),
          "backward: upstream gradient shape mismatch");
}

Eigen::Index chunk_count(Eigen::Index columns) {
  return (columns + kChunkColumns - 1) / kChunkColumns;
}

// Forward for columns [c0, c0 + n) of the batch, writing into the cache blocks.
void forward_block(const Network& net, const Mat& input, Eigen::Index c0, Eigen::Index n,
                   ForwardCache& cache) {
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto pre = cache.pre[l].middleCols(c0, n);
    if (l == 0) {
      pre.noalias() = layers[l].weight * input.middleCols(c0, n);
    } else {
      pre.noalias() = layers[l].weight * cache.post[l - 1].middleCols(c0, n);
    }
    pre.colwise() += layers[l].bias;
    if (l + 1 < layers.size()) {
      cache.post[l].middleCols(c0, n) = pre.cwiseMax(0.0);
    } else {
      cache.post[l].middleCols(c0, n) = net.apply_output(pre);
    }
  }
}

void backward_block(const Network& net, const ForwardCache& cache, const Mat& upstream,
                    Eigen::Index c0, Eigen::Index n, Gradients* grads, Mat* input_grad) {
  const auto& layers = net.layers();
  const std::size_t last = layers.size() - 1;
  Mat delta = upstream.middleCols(c0, n).cwiseProduct(
      net.output_derivative(cache.pre[last].middleCols(c0, n)));
  for (std::size_t l = last + 1; l-- > 0;) {
    if (grads) {
      const auto prev = l == 0 ? cache.input.middleCols(c0, n) : cache.post[l - 1].middleCols(c0, n);
      grads->weight[l].noalias() = delta * prev.transpose();
      grads->bias[l] = delta.rowwise().sum();
    }
    if (l == 0) {
      if (input_grad) input_grad->middleCols(c0, n).noalias() = layers[0].weight.transpose() * delta;
      break;
    }
    Mat back = layers[l].weight.transpose() * delta;
    delta = back.cwiseProduct(
        (cache.pre[l - 1].middleCols(c0, n).array() > 0.0).cast<double>().matrix());
  }
}

}  // namespace

Mat forward_parallel(const Network& net, const Mat& input, ForwardCache* cache) {
  check_input(net, input);
  const auto& layers = net.layers();
  const Eigen::Index batch = input.cols();
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.input = input;
  c.pre.resize(layers.size());
  c.post.resize(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    c.pre[l].resize(layers[l].weight.rows(), batch);
    c.post[l].resize(layers[l].weight.rows(), batch);
  }
  const Eigen::Index chunks = chunk_count(batch);
#pragma omp parallel for schedule(static) if (chunks > 1)
  for (Eigen::Index k = 0; k < chunks; ++k) {
    const Eigen::Index c0 = k * kChunkColumns;
    forward_block(net, input, c0, std::min(kChunkColumns, batch - c0), c);
  }
  return c.post.back();
}

Gradients backward_parallel(const Network& net, const ForwardCache& cache, const Mat& upstream,
                            Mat* input_grad, bool parameter_grads) {
  check_backward(net, cache, upstream);
  const Eigen::Index batch = upstream.cols();
  if (input_grad) input_grad->resize(net.input_dim(), batch);
  const Eigen::Index chunks = chunk_count(batch);
  std::vector<Gradients> partial(parameter_grads ? chunks : 0, net.zero_gradients());
#pragma omp parallel for schedule(static) if (chunks > 1)
  for (Eigen::Index k = 0; k < chunks; ++k) {
    const Eigen::Index c0 = k * kChunkColumns;
    backward_block(net, cache, upstream, c0, std::min(kChunkColumns, batch - c0),
                   parameter_grads ? &partial[k] : nullptr, input_grad);
  }
  Gradients total = net.zero_gradients();
  for (const auto& g : partial) total += g;
  return total;
}

Mat forward_reference(const Network& net, const Mat& input, ForwardCache* cache) {
  check_input(net, input);
  const auto& layers = net.layers();
  const Eigen::Index batch = input.cols();
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.input = input;
  c.pre.assign(layers.size(), Mat());
  c.post.assign(layers.size(), Mat());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Mat& w = layers[l].weight;
    const Mat& prev = l == 0 ? input : c.post[l - 1];
    c.pre[l].resize(w.rows(), batch);
    c.post[l].resize(w.rows(), batch);
    for (Eigen::Index s = 0; s < batch; ++s) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        double z = layers[l].bias(r);
        for (Eigen::Index i = 0; i < w.cols(); ++i) z += w(r, i) * prev(i, s);
        c.pre[l](r, s) = z;
      }
    }
    if (l + 1 < layers.size()) {
      for (Eigen::Index s = 0; s < batch; ++s)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
          c.post[l](r, s) = c.pre[l](r, s) > 0.0 ? c.pre[l](r, s) : 0.0;
    } else {
      c.post[l] = net.apply_output(c.pre[l]);
    }
  }
  return c.post.back();
}

Gradients backward_reference(const Network& net, const ForwardCache& cache, const Mat& upstream,
                             Mat* input_grad, bool parameter_grads) {
  check_backward(net, cache, upstream);
  const auto& layers = net.layers();
  const Eigen::Index batch = upstream.cols();
  Gradients grads = net.zero_gradients();
  if (input_grad) input_grad->setZero(net.input_dim(), batch);
  const std::size_t last = layers.size() - 1;
  const Mat out_d = net.output_derivative(cache.pre[last]);
  for (Eigen::Index s = 0; s < batch; ++s) {
    Vec delta(net.output_dim());
    for (Eigen::Index r = 0; r < delta.size(); ++r) delta(r) = upstream(r, s) * out_d(r, s);
    for (std::size_t l = last + 1; l-- > 0;) {
      const Mat& w = layers[l].weight;
      const Mat& prev = l == 0 ? cache.input : cache.post[l - 1];
      if (parameter_grads) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          grads.bias[l](r) += delta(r);
          for (Eigen::Index i = 0; i < w.cols(); ++i) grads.weight[l](r, i) += delta(r) * prev(i, s);
        }
      }
      Vec back = Vec::Zero(w.cols());
      for (Eigen::Index i = 0; i < w.cols(); ++i)
        for (Eigen::Index r = 0; r < w.rows(); ++r) back(i) += w(r, i) * delta(r);
      if (l == 0) {
        if (input_grad) input_grad->col(s) = back;
        break;
      }
      for (Eigen::Index i = 0; i < back.size(); ++i)
        back(i) = cache.pre[l - 1](i, s) > 0.0 ? back(i) : 0.0;
      delta = std::move(back);
    }
  }
  return grads;
}

}  // namespace etgl::nn::kernels
