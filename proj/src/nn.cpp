#include "tabsynth/nn.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace tabsynth {

namespace {

void check_blocks_cover(const BlockLayout& blocks, Index cols, const char* who) {
  if (layout_width(blocks) != cols) {
    throw TrainError(std::string(who) + ": block layout covers " +
                     std::to_string(layout_width(blocks)) + " columns, matrix has " +
                     std::to_string(cols));
  }
  for (const auto& b : blocks) {
    if (b.width <= 0) throw TrainError(std::string(who) + ": empty block");
  }
}

}  // namespace

DenseLayer make_dense(Index in, Index out, Activation act, Rng& rng) {
  if (in <= 0 || out <= 0) throw TrainError("make_dense: non-positive dimension");
  DenseLayer l;
  l.W.resize(in, out);
  double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Index r = 0; r < in; ++r) {
    for (Index c = 0; c < out; ++c) {
      l.W(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  l.b = RowVector::Zero(out);
  l.act = act;
  return l;
}

ForwardTrace forward(const std::vector<DenseLayer>& layers, const Matrix& x) {
  ForwardTrace t;
  t.inputs.reserve(layers.size());
  t.pre.reserve(layers.size());
  Matrix a = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (a.cols() != l.W.rows()) {
      throw TrainError("forward: layer " + std::to_string(i) + " expects " +
                       std::to_string(l.W.rows()) + " inputs, got " + std::to_string(a.cols()));
    }
    t.inputs.push_back(a);
    Matrix z = (a * l.W).rowwise() + l.b;
    t.pre.push_back(z);
    switch (l.act) {
      case Activation::identity:
        a = std::move(z);
        break;
      case Activation::relu:
        a = z.cwiseMax(0.0);
        break;
      case Activation::block_softmax:
        check_blocks_cover(l.blocks, z.cols(), "forward");
        a = blockwise_softmax(z, l.blocks);
        break;
    }
  }
  t.out = std::move(a);
  return t;
}

Matrix backward(const std::vector<DenseLayer>& layers, const ForwardTrace& trace,
                const Matrix& d_out, std::vector<LayerGrads>& grads) {
  grads.resize(layers.size());
  Matrix da = d_out;
  for (std::size_t ii = layers.size(); ii-- > 0;) {
    const DenseLayer& l = layers[ii];
    const Matrix& x = trace.inputs[ii];
    const Matrix& z = trace.pre[ii];
    Matrix dz;
    switch (l.act) {
      case Activation::identity:
        dz = std::move(da);
        break;
      case Activation::relu:
        dz = (z.array() > 0.0).select(da, 0.0);
        break;
      case Activation::block_softmax: {
        const Matrix& a = (ii + 1 < layers.size()) ? trace.inputs[ii + 1] : trace.out;
        dz = blockwise_softmax_backward(a, da, l.blocks);
        break;
      }
    }
    grads[ii].dW = x.transpose() * dz;
    grads[ii].db = dz.colwise().sum();
    da = dz * l.W.transpose();
  }
  return da;
}

Matrix blockwise_softmax(const Matrix& x, const BlockLayout& blocks) {
  check_blocks_cover(blocks, x.cols(), "blockwise_softmax");
  Matrix out(x.rows(), x.cols());
  for (const auto& b : blocks) {
    auto blk = x.middleCols(b.offset, b.width);
    Vector mx = blk.rowwise().maxCoeff();
    Matrix e = (blk.colwise() - mx).array().exp();
    Vector s = e.rowwise().sum();
    out.middleCols(b.offset, b.width) = e.array().colwise() / s.array();
  }
  return out;
}

Matrix blockwise_softmax_backward(const Matrix& p, const Matrix& dp, const BlockLayout& blocks) {
  if (p.rows() != dp.rows() || p.cols() != dp.cols()) {
    throw TrainError("blockwise_softmax_backward: shape mismatch");
  }
  check_blocks_cover(blocks, p.cols(), "blockwise_softmax_backward");
  Matrix dz(p.rows(), p.cols());
  for (const auto& b : blocks) {
    auto pb = p.middleCols(b.offset, b.width);
    auto db = dp.middleCols(b.offset, b.width);
    Vector dot = (pb.array() * db.array()).rowwise().sum();
    dz.middleCols(b.offset, b.width) = pb.array() * (db.array().colwise() - dot.array());
  }
  return dz;
}

double cross_entropy(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw TrainError("cross_entropy: shape mismatch");
  }
  Matrix pc = pred.cwiseMax(1e-12).cwiseMin(1.0);
  double total = -(target.array() * pc.array().log()).sum();
  return total / static_cast<double>(pred.rows());
}

Matrix cross_entropy_grad(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw TrainError("cross_entropy_grad: shape mismatch");
  }
  double n = static_cast<double>(pred.rows());
  Matrix pc = pred.cwiseMax(1e-12).cwiseMin(1.0);
  Matrix g = (-(target.array() / pc.array()) / n).matrix();
  // The clamp is flat outside [1e-12, 1]; its gradient is 0 there.
  return ((pred.array() >= 1e-12) && (pred.array() <= 1.0)).select(g, 0.0);
}

double kl_uniform_categorical(const Matrix& q, const BlockLayout& blocks) {
  check_blocks_cover(blocks, q.cols(), "kl_uniform_categorical");
  double total = 0.0;
  for (const auto& b : blocks) {
    double log_c = std::log(static_cast<double>(b.width));
    for (Index r = 0; r < q.rows(); ++r) {
      for (Index j = 0; j < b.width; ++j) {
        double v = q(r, b.offset + j);
        if (v > 0.0) total += v * (std::log(v) + log_c);
      }
    }
  }
  return total / (static_cast<double>(q.rows()) * static_cast<double>(blocks.size()));
}

Matrix kl_uniform_categorical_grad(const Matrix& q, const BlockLayout& blocks) {
  check_blocks_cover(blocks, q.cols(), "kl_uniform_categorical_grad");
  double scale = 1.0 / (static_cast<double>(q.rows()) * static_cast<double>(blocks.size()));
  Matrix g = Matrix::Zero(q.rows(), q.cols());
  for (const auto& b : blocks) {
    double log_c = std::log(static_cast<double>(b.width));
    for (Index r = 0; r < q.rows(); ++r) {
      for (Index j = 0; j < b.width; ++j) {
        double v = q(r, b.offset + j);
        if (v > 0.0) g(r, b.offset + j) = (std::log(v) + log_c + 1.0) * scale;
      }
    }
  }
  return g;
}

std::vector<ParamView> layer_param_views(std::vector<DenseLayer>& layers) {
  std::vector<ParamView> views;
  views.reserve(layers.size() * 2);
  for (auto& l : layers) {
    views.push_back({l.W.data(), l.W.size()});
    views.push_back({l.b.data(), l.b.size()});
  }
  return views;
}

std::vector<ParamView> layer_grad_views(std::vector<LayerGrads>& grads) {
  std::vector<ParamView> views;
  views.reserve(grads.size() * 2);
  for (auto& g : grads) {
    views.push_back({g.dW.data(), g.dW.size()});
    views.push_back({g.db.data(), g.db.size()});
  }
  return views;
}

AdamState AdamState::init(const std::vector<ParamView>& params, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const auto& p : params) {
    s.m.push_back(Vector::Zero(p.size));
    s.v.push_back(Vector::Zero(p.size));
  }
  return s;
}

void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw TrainError("adam_step: tensor count mismatch");
  }
  ++state.t;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    const ParamView& p = params[ti];
    const ParamView& g = grads[ti];
    if (p.size != g.size) throw TrainError("adam_step: size mismatch in tensor " + std::to_string(ti));
    Vector& m = state.m[ti];
    Vector& v = state.v[ti];
    for (Index i = 0; i < p.size; ++i) {
      double gi = g.data[i];
      if (!std::isfinite(gi)) {
        throw TrainError("adam_step: non-finite gradient in tensor " + std::to_string(ti) +
                         " at coordinate " + std::to_string(i));
      }
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      p.data[i] -= state.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + state.eps);
    }
  }
}

double gradient_check(const std::function<double()>& loss_fn, const std::vector<ParamView>& params,
                      const std::vector<ParamView>& analytic_grads, Index max_coords, double h,
                      std::uint64_t seed, double floor) {
  if (params.size() != analytic_grads.size()) throw TrainError("gradient_check: tensor count mismatch");
  Index total = 0;
  for (const auto& p : params) total += p.size;
  if (total == 0) return 0.0;

  std::vector<Index> coords(static_cast<std::size_t>(total));
  std::iota(coords.begin(), coords.end(), Index{0});
  Index ncheck = std::min(total, max_coords);
  if (ncheck < total) {
    Rng rng(seed);
    rng.shuffle(coords);
    coords.resize(static_cast<std::size_t>(ncheck));
  }

  double worst = 0.0;
  for (Index flat : coords) {
    std::size_t ti = 0;
    Index off = flat;
    while (off >= params[ti].size) {
      off -= params[ti].size;
      ++ti;
    }
    double* slot = params[ti].data + off;
    double g = analytic_grads[ti].data[off];
    double orig = *slot;
    *slot = orig + h;
    double up = loss_fn();
    *slot = orig - h;
    double down = loss_fn();
    *slot = orig;
    double fd = (up - down) / (2.0 * h);
    double rel = std::abs(fd - g) / std::max(std::abs(fd) + std::abs(g), floor);
    if (rel > worst) worst = rel;
  }
  return worst;
}

}  // namespace tabsynth
