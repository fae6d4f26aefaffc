#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace oracle {

using tabsynth::Dataset;
using tabsynth::Index;
using tabsynth::Matrix;

double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

GroupTally tally(const Dataset& d) {
  GroupTally t;
  Index s = d.sensitive_column();
  Index b = d.unprivileged_index();
  Index w = d.privileged_index();
  for (Index i = 0; i < d.size(); ++i) {
    bool pos = d.labels(i) == 1;
    (pos ? t.pos : t.neg)++;
    if (d.rows(i, s) == b) {
      (pos ? t.bp : t.bn)++;
    } else if (d.rows(i, s) == w) {
      (pos ? t.wp : t.wn)++;
    }
  }
  return t;
}

double stat_parity_diff(const Dataset& d) {
  GroupTally t = tally(d);
  return static_cast<double>(t.bp) / static_cast<double>(t.bp + t.bn) -
         static_cast<double>(t.wp) / static_cast<double>(t.wp + t.wn);
}

double disparate_impact(const Dataset& d) {
  GroupTally t = tally(d);
  double pb = static_cast<double>(t.bp) / static_cast<double>(t.bp + t.bn);
  double pw = static_cast<double>(t.wp) / static_cast<double>(t.wp + t.wn);
  if (pw == 0.0 && pb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (pw == 0.0) return std::numeric_limits<double>::infinity();
  return pb / pw;
}

double base_rate(const Dataset& d) {
  GroupTally t = tally(d);
  return static_cast<double>(t.pos) / static_cast<double>(t.pos + t.neg);
}

double consistency(const Dataset& d, int k) {
  const Index n = d.size();
  const Index a = d.attribute_count();

  // Explicit one-hot attribute vectors.
  std::vector<Index> offsets(static_cast<std::size_t>(a), 0);
  Index width = 0;
  for (Index c = 0; c < a; ++c) {
    offsets[static_cast<std::size_t>(c)] = width;
    width += static_cast<Index>(d.schema.columns[static_cast<std::size_t>(c)].domain.size());
  }
  std::vector<std::vector<double>> onehot(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(width), 0.0));
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < a; ++c) {
      onehot[static_cast<std::size_t>(i)]
            [static_cast<std::size_t>(offsets[static_cast<std::size_t>(c)] + d.rows(i, c))] = 1.0;
    }
  }

  std::vector<double> deviations;
  for (Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Index>> cand;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dist = 0.0;
      for (Index f = 0; f < width; ++f) {
        double diff = onehot[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)] -
                      onehot[static_cast<std::size_t>(j)][static_cast<std::size_t>(f)];
        dist += diff * diff;
      }
      cand.emplace_back(dist, j);
    }
    std::stable_sort(cand.begin(), cand.end());
    if (static_cast<int>(cand.size()) < k) throw std::runtime_error("too few rows for k");
    std::vector<double> labels;
    for (int t = 0; t < k; ++t) {
      labels.push_back(static_cast<double>(d.labels(cand[static_cast<std::size_t>(t)].second)));
    }
    double mean = kahan_sum(labels) / static_cast<double>(k);
    deviations.push_back(std::fabs(static_cast<double>(d.labels(i)) - mean));
  }
  return 1.0 - kahan_sum(deviations) / static_cast<double>(n);
}

Matrix naive_forward(const std::vector<tabsynth::DenseLayer>& layers, const Matrix& x) {
  Matrix cur = x;
  for (const auto& layer : layers) {
    Matrix next(cur.rows(), layer.W.cols());
    for (Index i = 0; i < cur.rows(); ++i) {
      for (Index j = 0; j < layer.W.cols(); ++j) {
        double acc = layer.b(j);
        for (Index m = 0; m < cur.cols(); ++m) acc += cur(i, m) * layer.W(m, j);
        next(i, j) = layer.act == tabsynth::Activation::relu ? std::max(acc, 0.0) : acc;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Matrix naive_block_softmax(const Matrix& logits, const tabsynth::BlockLayout& blocks) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    for (const auto& blk : blocks) {
      long double mx = logits(i, blk.offset);
      for (Index j = 1; j < blk.width; ++j) mx = std::max<long double>(mx, logits(i, blk.offset + j));
      long double denom = 0.0;
      for (Index j = 0; j < blk.width; ++j) denom += expl(logits(i, blk.offset + j) - mx);
      for (Index j = 0; j < blk.width; ++j) {
        out(i, blk.offset + j) = static_cast<double>(expl(logits(i, blk.offset + j) - mx) / denom);
      }
    }
  }
  return out;
}

}  // namespace oracle
