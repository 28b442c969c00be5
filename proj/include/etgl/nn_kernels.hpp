#pragma once

// Batched MLP kernels. The parallel versions split the batch into fixed
// column chunks (independent of the thread count) and reduce parameter
// gradients chunk by chunk in index order, so results are bitwise stable
// for any OMP_NUM_THREADS. The reference versions are plain per-sample
// loops kept as a test oracle and benchmark baseline.

#include <Eigen/Core>

#include "etgl/nn.hpp"

namespace etgl::nn::kernels {

inline constexpr Eigen::Index kChunkColumns = 128;

Mat forward_parallel(const Network& net, const Mat& input, ForwardCache* cache);
Gradients backward_parallel(const Network& net, const ForwardCache& cache, const Mat& upstream,
                            Mat* input_grad, bool parameter_grads);

Mat forward_reference(const Network& net, const Mat& input, ForwardCache* cache);
Gradients backward_reference(const Network& net, const ForwardCache& cache, const Mat& upstream,
                             Mat* input_grad, bool parameter_grads);

}  // namespace etgl::nn::kernels
