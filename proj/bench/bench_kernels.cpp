#include <benchmark/benchmark.h>

#include <vector>

#include "etgl/nn.hpp"
#include "etgl/nn_kernels.hpp"

namespace {

using etgl::Mat;
using etgl::nn::ForwardCache;
using etgl::nn::Network;
namespace kernels = etgl::nn::kernels;

Network critic_net() {
  etgl::Rng rng(7);
  const std::vector<int> sizes{6, 128, 128, 128, 1};
  return Network(sizes, etgl::nn::OutputActivation::identity, rng);
}

Mat batch_input(int rows, int cols) {
  etgl::Rng rng(11);
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_ForwardReference(benchmark::State& state) {
  const Network net = critic_net();
  const Mat x = batch_input(6, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::forward_reference(net, x, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardParallel(benchmark::State& state) {
  const Network net = critic_net();
  const Mat x = batch_input(6, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::forward_parallel(net, x, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BackwardReference(benchmark::State& state) {
  const Network net = critic_net();
  const Mat x = batch_input(6, static_cast<int>(state.range(0)));
  ForwardCache cache;
  kernels::forward_reference(net, x, &cache);
  const Mat up = Mat::Ones(1, x.cols());
  Mat input_grad;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::backward_reference(net, cache, up, &input_grad, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BackwardParallel(benchmark::State& state) {
  const Network net = critic_net();
  const Mat x = batch_input(6, static_cast<int>(state.range(0)));
  ForwardCache cache;
  kernels::forward_parallel(net, x, &cache);
  const Mat up = Mat::Ones(1, x.cols());
  Mat input_grad;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::backward_parallel(net, cache, up, &input_grad, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_ForwardReference)->Arg(128)->Arg(1024);
BENCHMARK(BM_ForwardParallel)->Arg(128)->Arg(1024);
BENCHMARK(BM_BackwardReference)->Arg(128)->Arg(1024);
BENCHMARK(BM_BackwardParallel)->Arg(128)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
