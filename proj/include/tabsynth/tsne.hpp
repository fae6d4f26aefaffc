#pragma once

#include <cstdint>
#include <vector>

#include "tabsynth/types.hpp"

namespace tabsynth {

struct TsneOptions {
  Index dims = 2;  // 2 or 3
  double perplexity = 30.0;
  Index iters = 500;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  Index exaggeration_iters = 100;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  Index momentum_switch_iter = 250;
};

struct TsneResult {
  Matrix embedding;               // N x dims
  std::vector<double> objective;  // KL(P || Q) after each iteration
};

// Exact t-SNE: full N x N affinities, per-point precision fitted by binary
// search to the perplexity target, gradient descent with momentum and
// per-coordinate gains, early exaggeration on the first iterations. The
// objective trace is always measured against the unexaggerated P. Caps at
// N = 4000 (quadratic memory and time); subsample larger inputs first.
TsneResult tsne_embed(const Matrix& points, const TsneOptions& opts = {});

}  // namespace tabsynth
