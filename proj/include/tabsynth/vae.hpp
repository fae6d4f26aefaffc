#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabsynth/encode.hpp"
#include "tabsynth/nn.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

struct VaeArch {
  Index classes = 10;        // C, classes per latent distribution
  Index distributions = 8;   // D, number of latent distributions
  std::vector<Index> encoder_hidden = {128, 64};
  std::vector<Index> decoder_hidden = {64, 128};
};

// Encoder maps one-hot records to D*C latent logits; decoder maps a latent
// simplex back to per-block probabilities over attributes + label. The
// model remembers which schema it was built against by hash.
struct VaeModel {
  std::vector<DenseLayer> encoder;  // hidden relu layers + identity logit head
  std::vector<DenseLayer> decoder;  // hidden relu layers + block_softmax head
  VaeArch arch;
  double temperature = 1.0;
  BlockLayout data_blocks;    // attributes + label block
  BlockLayout latent_blocks;  // D blocks of width C
  std::string schema_hash;

  Index input_width() const { return layout_width(data_blocks); }
  Index latent_width() const { return arch.classes * arch.distributions; }
};

VaeModel make_vae(const Schema& schema, const VaeArch& arch, std::uint64_t seed);

// Latent logits, N x C*D.
Matrix vae_encode(const VaeModel& m, const Matrix& x);

// Standard Gumbel noise, drawn row by row; freezing this matrix freezes the
// sampling path for gradient checks.
Matrix gumbel_noise(Index rows, Index cols, std::uint64_t seed);

// softmax((logits + noise) / tau) per block: a relaxed one-hot sample that
// sharpens toward argmax as tau drops.
Matrix gumbel_softmax(const Matrix& logits, const BlockLayout& blocks, double tau,
                      const Matrix& noise);
Matrix gumbel_softmax_sample(const Matrix& logits, const BlockLayout& blocks, double tau,
                             std::uint64_t seed);

// Block-probability matrix over attributes + label, N x input_width.
Matrix vae_decode(const VaeModel& m, const Matrix& z);

struct LossParts {
  double ce = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

// Reconstruction cross-entropy of decode(sample(encode(x))) against x, plus
// the KL divergence of the posterior from the uniform prior. When grad
// outputs are given, also fills parameter gradients for both stacks.
LossParts vae_loss_with_noise(const VaeModel& m, const Matrix& x, const Matrix& noise,
                              std::vector<LayerGrads>* enc_grads = nullptr,
                              std::vector<LayerGrads>* dec_grads = nullptr);
LossParts vae_loss(const VaeModel& m, const Matrix& x, std::uint64_t noise_seed);

struct TrainConfig {
  Index epochs = 50;
  Index batch = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double tau_initial = 1.0;
  double tau_floor = 0.5;
  double tau_decay = 0.986;  // per epoch, multiplicative
  Index patience = 10;
};

struct LossTrace {
  std::vector<LossParts> train;
  std::vector<LossParts> validation;
};

struct TrainResult {
  VaeModel model;
  LossTrace trace;
};

// Splits d 70/10/20 internally, trains with mini-batch ADAM on the training
// split, evaluates both splits once per epoch, and returns the model from
// the best validation epoch. Deterministic per cfg.seed.
TrainResult train_vae(const Dataset& d, const VaeArch& arch, const TrainConfig& cfg);

enum class SynthMode { reconstruction, prior };

// Reconstruction mode: encode source rows (cycled to n), draw one hard
// class per latent distribution from the posterior, decode, then draw every
// attribute and the label from its output simplex. Prior mode: latent
// classes drawn uniformly instead.
Dataset synthesize(const VaeModel& m, const Dataset& source, Index n, SynthMode mode,
                   std::uint64_t seed);

// Tensor file at path plus a plain-text sidecar at path + ".meta".
void save_vae(const VaeModel& m, const std::string& path);
VaeModel load_vae(const std::string& path);

}  // namespace tabsynth
