#include "tabsynth/tsne.hpp"

#include <cmath>
#include <limits>

#include "tabsynth/rng.hpp"

namespace tabsynth {

namespace {

Matrix pairwise_squared_distances(const Matrix& x) {
  Vector sq = x.rowwise().squaredNorm();
  Matrix d = (-2.0 * (x * x.transpose())).eval();
  d.colwise() += sq;
  d.rowwise() += sq.transpose();
  d.diagonal().setZero();
  return d.cwiseMax(0.0);
}

// Fits one row of conditional affinities so its entropy hits
// log(perplexity); returns the unnormalized row and its sum.
void fit_row(const Matrix& d2, Index i, double log_perp, Vector& row) {
  const Index n = d2.rows();
  double beta = 1.0;
  double beta_min = -std::numeric_limits<double>::infinity();
  double beta_max = std::numeric_limits<double>::infinity();

  for (int it = 0; it < 50; ++it) {
    double sum = 0.0, dsum = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) {
        row[j] = 0.0;
        continue;
      }
      double p = std::exp(-d2(i, j) * beta);
      row[j] = p;
      sum += p;
      dsum += d2(i, j) * p;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      // Degenerate row (everything unreachable at this precision): soften.
      beta_max = beta;
      beta = (std::isinf(beta_min)) ? beta / 2.0 : (beta + beta_min) / 2.0;
      continue;
    }
    double entropy = std::log(sum) + beta * dsum / sum;
    double diff = entropy - log_perp;
    if (std::abs(diff) < 1e-5) break;
    if (diff > 0.0) {
      beta_min = beta;
      beta = std::isinf(beta_max) ? beta * 2.0 : (beta + beta_max) / 2.0;
    } else {
      beta_max = beta;
      beta = std::isinf(beta_min) ? beta / 2.0 : (beta + beta_min) / 2.0;
    }
  }

  double sum = 0.0;
  for (Index j = 0; j < n; ++j) sum += row[j];
  if (sum > 0.0 && std::isfinite(sum)) {
    row /= sum;
  } else {
    row.setConstant(1.0 / static_cast<double>(n - 1));
    row[i] = 0.0;
  }
}

}  // namespace

TsneResult tsne_embed(const Matrix& points, const TsneOptions& opts) {
  const Index n = points.rows();
  if (n > 4000) {
    throw DataError("t-sne: " + std::to_string(n) +
                    " points exceeds the 4000-point cap of the exact method; subsample first");
  }
  if (n < 4) throw DataError("t-sne: needs at least 4 points");
  if (opts.dims != 2 && opts.dims != 3) throw ConfigError("t-sne: dims must be 2 or 3");
  if (opts.iters <= 0) throw ConfigError("t-sne: iters must be positive");
  if (!(opts.perplexity > 0.0)) throw ConfigError("t-sne: perplexity must be positive");
  if (opts.perplexity >= static_cast<double>(n) / 3.0) {
    throw ConfigError("t-sne: perplexity must be below N/3");
  }

  Matrix d2 = pairwise_squared_distances(points);
  double log_perp = std::log(opts.perplexity);

  Matrix cond(n, n);
  Vector row(n);
  for (Index i = 0; i < n; ++i) {
    fit_row(d2, i, log_perp, row);
    cond.row(i) = row.transpose();
  }
  Matrix p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  Rng rng(opts.seed);
  Matrix y(n, opts.dims);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < opts.dims; ++c) y(i, c) = rng.gaussian() * 1e-4;
  }
  Matrix inc = Matrix::Zero(n, opts.dims);
  Matrix gains = Matrix::Ones(n, opts.dims);

  TsneResult result;
  result.objective.reserve(static_cast<std::size_t>(opts.iters));

  for (Index t = 0; t < opts.iters; ++t) {
    Matrix yd2 = pairwise_squared_distances(y);
    Matrix w = (1.0 + yd2.array()).inverse().matrix();
    w.diagonal().setZero();
    double wsum = w.sum();
    Matrix q = (w / wsum).cwiseMax(1e-12);
    q.diagonal().setZero();

    double scale = (t < opts.exaggeration_iters) ? opts.exaggeration : 1.0;
    Matrix mult = ((scale * p) - q).cwiseProduct(w);
    Vector rowsum = mult.rowwise().sum();
    Matrix grad = 4.0 * (rowsum.asDiagonal() * y - mult * y);

    double momentum = (t < opts.momentum_switch_iter) ? opts.initial_momentum : opts.final_momentum;
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < opts.dims; ++c) {
        bool same_dir = (grad(i, c) > 0.0) == (inc(i, c) > 0.0);
        gains(i, c) = same_dir ? gains(i, c) * 0.8 : gains(i, c) + 0.2;
        if (gains(i, c) < 0.01) gains(i, c) = 0.01;
        inc(i, c) = momentum * inc(i, c) - opts.learning_rate * gains(i, c) * grad(i, c);
      }
    }
    y += inc;
    RowVector mean = y.colwise().mean();
    y.rowwise() -= mean;

    double kl = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        double pij = p(i, j);
        if (pij > 0.0) kl += pij * std::log(pij / q(i, j));
      }
    }
    result.objective.push_back(kl);
  }

  result.embedding = std::move(y);
  return result;
}

}  // namespace tabsynth
