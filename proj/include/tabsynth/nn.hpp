#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tabsynth/rng.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

enum class Activation { identity, relu, block_softmax };

// Fully connected layer, weights stored input-major (in x out). Layers with
// block_softmax activation normalize each block of output columns to a
// probability simplex and carry the layout in `blocks`.
struct DenseLayer {
  Matrix W;
  RowVector b;
  Activation act = Activation::identity;
  BlockLayout blocks;
};

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), drawn row by row;
// zero bias.
DenseLayer make_dense(Index in, Index out, Activation act, Rng& rng);

// Everything the backward pass needs: the input each layer saw, its
// pre-activation values, and the final output.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;
  Matrix out;
};

ForwardTrace forward(const std::vector<DenseLayer>& layers, const Matrix& x);

struct LayerGrads {
  Matrix dW;
  RowVector db;
};

// Reverse pass over the same stack. d_out is dLoss/d(trace.out); fills
// per-layer parameter gradients and returns dLoss/d(input).
Matrix backward(const std::vector<DenseLayer>& layers, const ForwardTrace& trace,
                const Matrix& d_out, std::vector<LayerGrads>& grads);

Matrix blockwise_softmax(const Matrix& x, const BlockLayout& blocks);

// Given softmax outputs p and upstream gradient dp, returns the gradient
// with respect to the pre-softmax values.
Matrix blockwise_softmax_backward(const Matrix& p, const Matrix& dp, const BlockLayout& blocks);

// Mean over rows of -sum(target * log(pred)), pred clamped to [1e-12, 1].
double cross_entropy(const Matrix& pred, const Matrix& target);
Matrix cross_entropy_grad(const Matrix& pred, const Matrix& target);

// Mean over rows and blocks of sum(q * (log q + log C)), the divergence of
// each block simplex from the uniform distribution over its C classes.
// Zero entries contribute zero.
double kl_uniform_categorical(const Matrix& q, const BlockLayout& blocks);
Matrix kl_uniform_categorical_grad(const Matrix& q, const BlockLayout& blocks);

// Mutable flat view over one parameter tensor, shared by the optimizer, the
// gradient checker, and checkpointing so they all see the same ordering.
struct ParamView {
  double* data = nullptr;
  Index size = 0;
};

std::vector<ParamView> layer_param_views(std::vector<DenseLayer>& layers);
std::vector<ParamView> layer_grad_views(std::vector<LayerGrads>& grads);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-3;
  std::int64_t t = 0;
  std::vector<Vector> m;
  std::vector<Vector> v;

  static AdamState init(const std::vector<ParamView>& params, double lr = 1e-3);
};

// One bias-corrected update. Throws TrainError on a non-finite gradient,
// naming the tensor and coordinate.
void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               AdamState& state);

// Central-difference check of analytic gradients over up to max_coords
// sampled coordinates (all of them when there are fewer). loss_fn must
// re-evaluate the loss at the current parameter values; params are nudged
// in place and restored. Returns the max relative error
// |fd - g| / max(|fd| + |g|, floor).
double gradient_check(const std::function<double()>& loss_fn,
                      const std::vector<ParamView>& params,
                      const std::vector<ParamView>& analytic_grads, Index max_coords = 200,
                      double h = 1e-5, std::uint64_t seed = 0, double floor = 1e-3);

}  // namespace tabsynth
