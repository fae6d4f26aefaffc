#include "tabsynth/vae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "tabsynth/checkpoint.hpp"
#include "tabsynth/format.hpp"
#include "tabsynth/split.hpp"
#include "tabsynth/version.hpp"

namespace tabsynth {

namespace {

BlockLayout latent_layout(Index classes, Index distributions) {
  std::vector<Index> widths(static_cast<std::size_t>(distributions), classes);
  return layout_from_widths(widths);
}

std::vector<DenseLayer> make_stack(Index in, const std::vector<Index>& hidden, Index out,
                                   Activation head_act, const BlockLayout& head_blocks, Rng& rng) {
  std::vector<DenseLayer> layers;
  Index prev = in;
  for (Index h : hidden) {
    layers.push_back(make_dense(prev, h, Activation::relu, rng));
    prev = h;
  }
  DenseLayer head = make_dense(prev, out, head_act, rng);
  head.blocks = head_blocks;
  layers.push_back(std::move(head));
  return layers;
}

std::vector<ParamView> model_param_views(VaeModel& m) {
  std::vector<ParamView> views = layer_param_views(m.encoder);
  auto dec = layer_param_views(m.decoder);
  views.insert(views.end(), dec.begin(), dec.end());
  return views;
}

Index draw_from_block(const Matrix& p, Index row, Index offset, Index width, double u) {
  double cum = 0.0;
  for (Index j = 0; j < width; ++j) {
    cum += p(row, offset + j);
    if (u < cum) return j;
  }
  return width - 1;
}

}  // namespace

VaeModel make_vae(const Schema& schema, const VaeArch& arch, std::uint64_t seed) {
  if (arch.classes <= 0 || arch.distributions <= 0) {
    throw ConfigError("vae: classes and distributions must be positive");
  }
  VaeModel m;
  m.arch = arch;
  m.data_blocks = schema_block_layout(schema, true);
  m.latent_blocks = latent_layout(arch.classes, arch.distributions);
  m.schema_hash = schema.sha256_hex();
  Index in = layout_width(m.data_blocks);
  Index lat = arch.classes * arch.distributions;
  Rng rng(seed);
  m.encoder = make_stack(in, arch.encoder_hidden, lat, Activation::identity, {}, rng);
  m.decoder = make_stack(lat, arch.decoder_hidden, in, Activation::block_softmax, m.data_blocks, rng);
  return m;
}

Matrix vae_encode(const VaeModel& m, const Matrix& x) {
  if (x.cols() != m.input_width()) {
    throw TrainError("encode: input width " + std::to_string(x.cols()) + ", model expects " +
                     std::to_string(m.input_width()));
  }
  return forward(m.encoder, x).out;
}

Matrix gumbel_noise(Index rows, Index cols, std::uint64_t seed) {
  Matrix g(rows, cols);
  Rng rng(seed);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) g(r, c) = rng.gumbel();
  }
  return g;
}

Matrix gumbel_softmax(const Matrix& logits, const BlockLayout& blocks, double tau,
                      const Matrix& noise) {
  if (tau <= 0.0) throw TrainError("gumbel_softmax: tau must be positive");
  if (noise.rows() != logits.rows() || noise.cols() != logits.cols()) {
    throw TrainError("gumbel_softmax: noise shape mismatch");
  }
  return blockwise_softmax((logits + noise) / tau, blocks);
}

Matrix gumbel_softmax_sample(const Matrix& logits, const BlockLayout& blocks, double tau,
                             std::uint64_t seed) {
  return gumbel_softmax(logits, blocks, tau, gumbel_noise(logits.rows(), logits.cols(), seed));
}

Matrix vae_decode(const VaeModel& m, const Matrix& z) {
  if (z.cols() != m.latent_width()) {
    throw TrainError("decode: latent width " + std::to_string(z.cols()) + ", model expects " +
                     std::to_string(m.latent_width()));
  }
  return forward(m.decoder, z).out;
}

LossParts vae_loss_with_noise(const VaeModel& m, const Matrix& x, const Matrix& noise,
                              std::vector<LayerGrads>* enc_grads,
                              std::vector<LayerGrads>* dec_grads) {
  ForwardTrace enc = forward(m.encoder, x);
  const Matrix& logits = enc.out;
  Matrix q = blockwise_softmax(logits, m.latent_blocks);
  Matrix y = gumbel_softmax(logits, m.latent_blocks, m.temperature, noise);
  ForwardTrace dec = forward(m.decoder, y);
  const Matrix& p = dec.out;

  LossParts parts;
  parts.ce = cross_entropy(p, x);
  parts.kl = kl_uniform_categorical(q, m.latent_blocks);
  parts.total = parts.ce + parts.kl;
  if (!std::isfinite(parts.total)) {
    throw TrainError("non-finite loss: ce=" + format_metric(parts.ce) +
                     " kl=" + format_metric(parts.kl));
  }

  if (enc_grads != nullptr && dec_grads != nullptr) {
    Matrix dp = cross_entropy_grad(p, x);
    Matrix dy = backward(m.decoder, dec, dp, *dec_grads);
    Matrix dlogits = blockwise_softmax_backward(y, dy, m.latent_blocks) / m.temperature;
    Matrix dq = kl_uniform_categorical_grad(q, m.latent_blocks);
    dlogits += blockwise_softmax_backward(q, dq, m.latent_blocks);
    backward(m.encoder, enc, dlogits, *enc_grads);
  }
  return parts;
}

LossParts vae_loss(const VaeModel& m, const Matrix& x, std::uint64_t noise_seed) {
  return vae_loss_with_noise(m, x, gumbel_noise(x.rows(), m.latent_width(), noise_seed));
}

TrainResult train_vae(const Dataset& d, const VaeArch& arch, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("train: epochs must be non-negative");
  if (cfg.batch <= 0) throw ConfigError("train: batch size must be positive");
  if (cfg.lr <= 0.0) throw ConfigError("train: learning rate must be positive");
  if (cfg.patience <= 0) throw ConfigError("train: patience must be positive");
  if (cfg.tau_initial <= 0.0 || cfg.tau_floor <= 0.0 || cfg.tau_decay <= 0.0) {
    throw ConfigError("train: temperature schedule values must be positive");
  }

  DatasetSplit split = split_dataset(d, derive_seed(cfg.seed, "split"));
  const Index n_train = split.train.size();
  if (cfg.batch > n_train) {
    throw ConfigError("train: batch size " + std::to_string(cfg.batch) +
                      " exceeds training split size " + std::to_string(n_train));
  }
  Matrix x_train = one_hot_encode(split.train).values;
  Matrix x_val = one_hot_encode(split.validation).values;

  VaeModel model = make_vae(d.schema, arch, derive_seed(cfg.seed, "init"));
  std::vector<ParamView> params = model_param_views(model);
  AdamState adam = AdamState::init(params, cfg.lr);

  TrainResult result;
  result.model = model;
  double best_val = std::numeric_limits<double>::infinity();
  Index since_best = 0;

  std::vector<Index> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), Index{0});
  const Index n_batches = (n_train + cfg.batch - 1) / cfg.batch;

  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::string es = std::to_string(epoch);
    model.temperature =
        std::max(cfg.tau_floor, cfg.tau_initial * std::pow(cfg.tau_decay, static_cast<double>(epoch)));
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle:" + es));
    shuffle_rng.shuffle(order);

    for (Index b = 0; b < n_batches; ++b) {
      Index lo = b * cfg.batch;
      Index hi = std::min(lo + cfg.batch, n_train);
      Matrix batch(hi - lo, x_train.cols());
      for (Index i = lo; i < hi; ++i) batch.row(i - lo) = x_train.row(order[static_cast<std::size_t>(i)]);
      Matrix noise = gumbel_noise(batch.rows(), model.latent_width(),
                                  derive_seed(cfg.seed, "noise:" + es + ":" + std::to_string(b)));
      std::vector<LayerGrads> enc_grads, dec_grads;
      try {
        vae_loss_with_noise(model, batch, noise, &enc_grads, &dec_grads);
        std::vector<ParamView> gviews = layer_grad_views(enc_grads);
        auto dec_views = layer_grad_views(dec_grads);
        gviews.insert(gviews.end(), dec_views.begin(), dec_views.end());
        adam_step(params, gviews, adam);
      } catch (const TrainError& err) {
        throw TrainError("epoch " + es + " batch " + std::to_string(b) + ": " + err.what());
      }
    }

    LossParts train_loss = vae_loss(model, x_train, derive_seed(cfg.seed, "eval_train:" + es));
    LossParts val_loss = vae_loss(model, x_val, derive_seed(cfg.seed, "eval_val:" + es));
    result.trace.train.push_back(train_loss);
    result.trace.validation.push_back(val_loss);

    if (val_loss.total < best_val) {
      best_val = val_loss.total;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

Dataset synthesize(const VaeModel& m, const Dataset& source, Index n, SynthMode mode,
                   std::uint64_t seed) {
  if (m.schema_hash != source.schema.sha256_hex()) {
    throw DataError("schema mismatch: model was trained against a different schema");
  }
  if (n <= 0) throw DataError("synthesize: output size must be positive");
  if (source.size() == 0) throw DataError("synthesize: source dataset is empty");

  const Index classes = m.arch.classes;
  const Index dists = m.arch.distributions;
  Rng rng(derive_seed(seed, "synth"));
  Matrix z = Matrix::Zero(n, m.latent_width());

  if (mode == SynthMode::reconstruction) {
    Matrix x = one_hot_encode(source).values;
    Matrix q = blockwise_softmax(vae_encode(m, x), m.latent_blocks);
    for (Index i = 0; i < n; ++i) {
      Index s = i % source.size();
      for (Index dist = 0; dist < dists; ++dist) {
        Index pick = draw_from_block(q, s, dist * classes, classes, rng.uniform());
        z(i, dist * classes + pick) = 1.0;
      }
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index dist = 0; dist < dists; ++dist) {
        z(i, dist * classes + static_cast<Index>(rng.below(static_cast<std::uint64_t>(classes)))) = 1.0;
      }
    }
  }

  Matrix p = vae_decode(m, z);
  IndexMatrix out(n, source.attribute_count() + 1);
  for (Index i = 0; i < n; ++i) {
    for (std::size_t bi = 0; bi < m.data_blocks.size(); ++bi) {
      const Block& blk = m.data_blocks[bi];
      out(i, static_cast<Index>(bi)) =
          static_cast<std::int32_t>(draw_from_block(p, i, blk.offset, blk.width, rng.uniform()));
    }
  }
  return dataset_from_indices(source.schema, out);
}

void save_vae(const VaeModel& m, const std::string& path) {
  std::vector<Matrix> tensors;
  auto push_stack = [&](const std::vector<DenseLayer>& layers) {
    for (const auto& l : layers) {
      tensors.push_back(l.W);
      tensors.push_back(l.b);
    }
  };
  push_stack(m.encoder);
  push_stack(m.decoder);
  write_tensors(path, tensors);

  std::ofstream meta(path + ".meta");
  if (!meta) throw DataError("cannot write model sidecar: " + path + ".meta");
  meta << "format tabsynth-vae-1\n";
  meta << "code_version " << kCodeVersion << "\n";
  meta << "schema_hash " << m.schema_hash << "\n";
  meta << "classes " << m.arch.classes << "\n";
  meta << "distributions " << m.arch.distributions << "\n";
  meta << "temperature " << format_g17(m.temperature) << "\n";
  meta << "encoder_hidden";
  for (Index h : m.arch.encoder_hidden) meta << " " << h;
  meta << "\n";
  meta << "decoder_hidden";
  for (Index h : m.arch.decoder_hidden) meta << " " << h;
  meta << "\n";
  meta << "data_blocks";
  for (const auto& b : m.data_blocks) meta << " " << b.width;
  meta << "\n";
}

VaeModel load_vae(const std::string& path) {
  std::ifstream meta_in(path + ".meta");
  if (!meta_in) throw DataError("cannot open model sidecar: " + path + ".meta");

  VaeModel m;
  std::vector<Index> block_widths;
  std::string line;
  bool format_ok = false;
  while (std::getline(meta_in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "tabsynth-vae-1") throw DataError("unsupported model sidecar format: " + fmt);
      format_ok = true;
    } else if (key == "schema_hash") {
      ls >> m.schema_hash;
    } else if (key == "classes") {
      ls >> m.arch.classes;
    } else if (key == "distributions") {
      ls >> m.arch.distributions;
    } else if (key == "temperature") {
      ls >> m.temperature;
    } else if (key == "encoder_hidden") {
      m.arch.encoder_hidden.clear();
      Index h;
      while (ls >> h) m.arch.encoder_hidden.push_back(h);
    } else if (key == "decoder_hidden") {
      m.arch.decoder_hidden.clear();
      Index h;
      while (ls >> h) m.arch.decoder_hidden.push_back(h);
    } else if (key == "data_blocks") {
      Index w;
      while (ls >> w) block_widths.push_back(w);
    }
    // Unknown keys (like code_version) are informational.
  }
  if (!format_ok) throw DataError("model sidecar missing format line: " + path + ".meta");
  if (m.arch.classes <= 0 || m.arch.distributions <= 0 || block_widths.empty()) {
    throw DataError("model sidecar incomplete: " + path + ".meta");
  }
  m.data_blocks = layout_from_widths(block_widths);
  m.latent_blocks = latent_layout(m.arch.classes, m.arch.distributions);

  std::vector<Matrix> tensors = read_tensors(path);
  std::size_t expect = 2 * (m.arch.encoder_hidden.size() + 1 + m.arch.decoder_hidden.size() + 1);
  if (tensors.size() != expect) {
    throw DataError("model checkpoint holds " + std::to_string(tensors.size()) +
                    " tensors, sidecar implies " + std::to_string(expect));
  }

  std::size_t ti = 0;
  auto take_stack = [&](Index in, const std::vector<Index>& hidden, Index out, Activation head_act,
                        const BlockLayout& head_blocks) {
    std::vector<DenseLayer> layers;
    Index prev = in;
    std::vector<Index> widths = hidden;
    widths.push_back(out);
    for (std::size_t li = 0; li < widths.size(); ++li) {
      DenseLayer l;
      l.W = std::move(tensors[ti++]);
      Matrix b = std::move(tensors[ti++]);
      if (l.W.rows() != prev || l.W.cols() != widths[li] || b.rows() != 1 ||
          b.cols() != widths[li]) {
        throw DataError("model checkpoint tensor shapes do not match sidecar");
      }
      l.b = b.row(0);
      bool is_head = (li + 1 == widths.size());
      l.act = is_head ? head_act : Activation::relu;
      if (is_head) l.blocks = head_blocks;
      layers.push_back(std::move(l));
      prev = widths[li];
    }
    return layers;
  };

  Index in = layout_width(m.data_blocks);
  Index lat = m.arch.classes * m.arch.distributions;
  m.encoder = take_stack(in, m.arch.encoder_hidden, lat, Activation::identity, {});
  m.decoder = take_stack(lat, m.arch.decoder_hidden, in, Activation::block_softmax, m.data_blocks);
  return m;
}

}  // namespace tabsynth
