#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tabsynth/demo.hpp"
#include "tabsynth/encode.hpp"
#include "tabsynth/vae.hpp"

using namespace tabsynth;
namespace fs = std::filesystem;

namespace {

VaeArch tiny_arch() {
  VaeArch a;
  a.classes = 3;
  a.distributions = 2;
  a.encoder_hidden = {8, 6};
  a.decoder_hidden = {6, 8};
  return a;
}

void zero_stack(std::vector<DenseLayer>& layers) {
  for (auto& l : layers) {
    l.W.setZero();
    l.b.setZero();
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir() {
  fs::path p = fs::temp_directory_path() / "tabsynth_vae_tests";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("model geometry follows the arch") {
  Schema s = fixtures::make_schema({2, 3, 4});
  VaeModel m = make_vae(s, tiny_arch(), 11);
  CHECK(m.latent_width() == 6);
  CHECK(m.input_width() == 2 + 3 + 4 + 2);
  REQUIRE(m.encoder.size() == 3);
  REQUIRE(m.decoder.size() == 3);
  CHECK(m.encoder.back().act == Activation::identity);
  CHECK(m.encoder.back().W.cols() == 6);
  CHECK(m.decoder.back().act == Activation::block_softmax);
  CHECK(m.decoder.back().W.cols() == m.input_width());
  REQUIRE(m.latent_blocks.size() == 2);
  CHECK(m.latent_blocks[1].offset == 3);
  CHECK(m.latent_blocks[1].width == 3);
  CHECK(m.schema_hash == s.sha256_hex());
  CHECK(m.data_blocks.size() == 4);  // three attributes + label
}

TEST_CASE("zero-weight encoder yields uniform posteriors and near-zero KL") {
  Schema s = fixtures::make_schema({2, 3});
  Dataset d = fixtures::make_dataset(s, {{0, 2}, {1, 0}, {0, 1}}, {1, 0, 1});
  VaeModel m = make_vae(s, tiny_arch(), 4);
  zero_stack(m.encoder);
  Matrix x = one_hot_encode(d).values;
  Matrix logits = vae_encode(m, x);
  CHECK(logits.cwiseAbs().maxCoeff() == 0.0);
  Matrix q = blockwise_softmax(logits, m.latent_blocks);
  CHECK((q.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);
  LossParts parts = vae_loss(m, x, 99);
  CHECK(parts.kl == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(parts.kl >= 0.0);
}

TEST_CASE("encode is deterministic and matches the forward oracle") {
  Schema s = fixtures::make_schema({2, 2, 3});
  Dataset d = fixtures::make_dataset(s, {{0, 1, 2}, {0, 1, 2}, {1, 0, 0}}, {1, 1, 0});
  VaeModel m = make_vae(s, tiny_arch(), 21);
  Matrix x = one_hot_encode(d).values;
  Matrix logits = vae_encode(m, x);
  CHECK(logits.row(0) == logits.row(1));  // identical inputs, identical logits
  Matrix want = oracle::naive_forward(m.encoder, x);
  CHECK((logits - want).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix bad(1, m.input_width() + 1);
  bad.setZero();
  CHECK_THROWS_AS(vae_encode(m, bad), TrainError);
}

TEST_CASE("gumbel softmax sharpens, distributes, and repeats") {
  BlockLayout blocks = layout_from_widths({4});
  SUBCASE("low temperature approaches one-hot") {
    Matrix logits(1, 4);
    logits << 9.0, 1.0, 0.5, -2.0;
    Matrix y = gumbel_softmax_sample(logits, blocks, 1e-6, 5);
    Index arg;
    y.row(0).maxCoeff(&arg);
    CHECK(y(0, arg) >= 1.0 - 1e-6);
    CHECK(y.row(0).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("uniform logits spread argmax classes evenly") {
    Matrix logits = Matrix::Zero(10000, 4);
    Matrix y = gumbel_softmax_sample(logits, blocks, 0.7, 31);
    std::vector<int> counts(4, 0);
    for (Index r = 0; r < y.rows(); ++r) {
      Index arg;
      y.row(r).maxCoeff(&arg);
      counts[static_cast<std::size_t>(arg)]++;
    }
    double expect = 10000.0 / 4.0;
    double sigma = std::sqrt(10000.0 * 0.25 * 0.75);
    for (int c : counts) CHECK(std::fabs(c - expect) <= 3.0 * sigma);
  }
  SUBCASE("fixed seed repeats exactly") {
    Matrix logits(3, 4);
    logits.setConstant(0.3);
    Matrix a = gumbel_softmax_sample(logits, blocks, 0.8, 77);
    Matrix b = gumbel_softmax_sample(logits, blocks, 0.8, 77);
    CHECK(a == b);
    Matrix c = gumbel_softmax_sample(logits, blocks, 0.8, 78);
    CHECK(a != c);
  }
}

TEST_CASE("decoder outputs are simplexes for random latents") {
  Schema s = fixtures::make_schema({2, 4});
  VaeModel m = make_vae(s, tiny_arch(), 31);
  Rng rng(90);
  Matrix z(25, m.latent_width());
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) z(i, j) = rng.gaussian() * 3.0;
  }
  Matrix p = vae_decode(m, z);
  for (Index r = 0; r < p.rows(); ++r) {
    for (const auto& b : m.data_blocks) {
      auto block = p.row(r).segment(b.offset, b.width);
      CHECK(block.minCoeff() >= 0.0);
      CHECK(block.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  // Zero-weight decoder: uniform over every block.
  zero_stack(m.decoder);
  Matrix u = vae_decode(m, z.topRows(2));
  for (const auto& b : m.data_blocks) {
    CHECK((u.middleCols(b.offset, b.width).array() - 1.0 / static_cast<double>(b.width))
              .abs()
              .maxCoeff() <= 1e-15);
  }
}

TEST_CASE("hand-built decoder drives reconstruction loss to zero") {
  Schema s = fixtures::make_schema({2});
  Dataset d = fixtures::make_dataset(s, {{1}}, {1});
  VaeModel m = make_vae(s, tiny_arch(), 41);
  zero_stack(m.encoder);  // uniform posterior, KL = 0
  zero_stack(m.decoder);
  // Head bias spells the record directly: +40 logits at the hot positions.
  m.decoder.back().b.setZero();
  m.decoder.back().b(1) = 40.0;  // a0 = v1
  m.decoder.back().b(3) = 40.0;  // label = positive
  Matrix x = one_hot_encode(d).values;
  LossParts parts = vae_loss(m, x, 7);
  CHECK(parts.ce <= 1e-6);
  CHECK(parts.kl <= 1e-12);
  CHECK(parts.total == doctest::Approx(parts.ce + parts.kl).epsilon(1e-12));
}

TEST_CASE("loss parts are non-negative and additive on random fixtures") {
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d = fixtures::random_dataset(rng, 12);
    VaeModel m = make_vae(d.schema, tiny_arch(), 100 + static_cast<std::uint64_t>(trial));
    LossParts parts = vae_loss(m, one_hot_encode(d).values, 500 + static_cast<std::uint64_t>(trial));
    CHECK(parts.ce >= 0.0);
    CHECK(parts.kl >= 0.0);
    CHECK(parts.total == doctest::Approx(parts.ce + parts.kl).epsilon(1e-9));
    CHECK(std::isfinite(parts.total));
  }
}

TEST_CASE("analytic VAE gradients agree with finite differences") {
  Schema s = fixtures::make_schema({2, 3});
  Rng rng(61);
  std::vector<std::vector<Index>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<Index>(rng.below(2)), static_cast<Index>(rng.below(3))});
    labels.push_back(static_cast<int>(rng.below(2)));
  }
  Dataset d = fixtures::make_dataset(s, rows, labels);
  VaeModel m = make_vae(s, tiny_arch(), 62);
  Matrix x = one_hot_encode(d).values;
  Matrix noise = gumbel_noise(x.rows(), m.latent_width(), 63);

  std::vector<LayerGrads> enc_grads, dec_grads;
  vae_loss_with_noise(m, x, noise, &enc_grads, &dec_grads);

  std::vector<ParamView> params = layer_param_views(m.encoder);
  std::vector<ParamView> dec_params = layer_param_views(m.decoder);
  params.insert(params.end(), dec_params.begin(), dec_params.end());
  std::vector<ParamView> grads = layer_grad_views(enc_grads);
  std::vector<ParamView> dec_gview = layer_grad_views(dec_grads);
  grads.insert(grads.end(), dec_gview.begin(), dec_gview.end());

  auto loss = [&] { return vae_loss_with_noise(m, x, noise).total; };
  double err = gradient_check(loss, params, grads, 300, 1e-5, 64);
  CHECK(err <= 1e-4);
}

TEST_CASE("training runs, records, and repeats bitwise") {
  Dataset d = generate_census_demo(120, 3);
  VaeArch arch = tiny_arch();
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch = 16;
  cfg.seed = 5;
  cfg.patience = 10;

  TrainResult r1 = train_vae(d, arch, cfg);
  CHECK(r1.trace.train.size() == 4);
  CHECK(r1.trace.validation.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    const LossParts& t = r1.trace.train[e];
    CHECK(t.total == doctest::Approx(t.ce + t.kl).epsilon(1e-9));
    CHECK(std::isfinite(t.total));
  }

  TrainResult r2 = train_vae(d, arch, cfg);
  fs::path p1 = temp_dir() / "m1.bin";
  fs::path p2 = temp_dir() / "m2.bin";
  save_vae(r1.model, p1.string());
  save_vae(r2.model, p2.string());
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("zero-epoch training returns the initialized model") {
  Dataset d = generate_census_demo(60, 9);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.batch = 8;
  cfg.seed = 8;
  TrainResult r = train_vae(d, tiny_arch(), cfg);
  CHECK(r.trace.train.empty());
  CHECK(r.trace.validation.empty());
  VaeModel fresh = make_vae(d.schema, tiny_arch(), derive_seed(8, "init"));
  CHECK(r.model.encoder.front().W == fresh.encoder.front().W);
}

TEST_CASE("training validates its configuration") {
  Dataset d = generate_census_demo(60, 9);
  TrainConfig cfg;
  cfg.epochs = 1;
  SUBCASE("batch larger than the training split") {
    cfg.batch = 1000;
    CHECK_THROWS_AS(train_vae(d, tiny_arch(), cfg), ConfigError);
  }
  SUBCASE("non-positive learning rate") {
    cfg.lr = 0.0;
    CHECK_THROWS_AS(train_vae(d, tiny_arch(), cfg), ConfigError);
  }
  SUBCASE("bad temperature schedule") {
    cfg.tau_floor = -1.0;
    CHECK_THROWS_AS(train_vae(d, tiny_arch(), cfg), ConfigError);
  }
}

TEST_CASE("synthesis respects size, schema, and seed") {
  Dataset d = generate_census_demo(150, 13);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 16;
  cfg.seed = 14;
  VaeModel m = train_vae(d, tiny_arch(), cfg).model;

  Dataset s1 = synthesize(m, d, d.size(), SynthMode::reconstruction, 200);
  CHECK(s1.size() == d.size());
  s1.validate();
  CHECK(s1.schema.canonical_text() == d.schema.canonical_text());

  Dataset s2 = synthesize(m, d, d.size(), SynthMode::reconstruction, 200);
  CHECK(s1.rows == s2.rows);
  CHECK(s1.labels == s2.labels);
  Dataset s3 = synthesize(m, d, d.size(), SynthMode::reconstruction, 201);
  CHECK((s1.rows != s3.rows || s1.labels != s3.labels));

  Dataset sp = synthesize(m, d, 37, SynthMode::prior, 300);
  CHECK(sp.size() == 37);
  sp.validate();

  // Cycling the source covers n larger than the source.
  Dataset big = synthesize(m, d, 2 * d.size() + 1, SynthMode::reconstruction, 400);
  CHECK(big.size() == 2 * d.size() + 1);

  Dataset other = generate_census_demo(40, 99);
  other.schema.columns[0].name = "renamed";
  other.schema.sensitive->column = "renamed";
  CHECK_THROWS_AS(synthesize(m, other, 10, SynthMode::reconstruction, 1), DataError);
}

TEST_CASE("checkpoints round trip bitwise with their sidecar") {
  Dataset d = generate_census_demo(80, 55);
  VaeModel m = make_vae(d.schema, tiny_arch(), 56);
  m.temperature = 0.625;
  fs::path p = temp_dir() / "round.bin";
  save_vae(m, p.string());
  VaeModel back = load_vae(p.string());

  REQUIRE(back.encoder.size() == m.encoder.size());
  for (std::size_t i = 0; i < m.encoder.size(); ++i) {
    CHECK(back.encoder[i].W == m.encoder[i].W);
    CHECK(back.encoder[i].b == m.encoder[i].b);
  }
  for (std::size_t i = 0; i < m.decoder.size(); ++i) {
    CHECK(back.decoder[i].W == m.decoder[i].W);
    CHECK(back.decoder[i].b == m.decoder[i].b);
  }
  CHECK(back.temperature == m.temperature);
  CHECK(back.schema_hash == m.schema_hash);
  CHECK(back.arch.classes == 3);
  CHECK(back.arch.distributions == 2);
  CHECK(back.data_blocks.size() == m.data_blocks.size());

  std::string meta = slurp(p.string() + ".meta");
  CHECK(meta.find("format tabsynth-vae-1") != std::string::npos);
  CHECK(meta.find("schema_hash " + m.schema_hash) != std::string::npos);
  CHECK(meta.find("classes 3") != std::string::npos);

  // A corrupted magic number is rejected.
  std::string bytes = slurp(p);
  bytes[0] = 'X';
  std::ofstream(p, std::ios::binary) << bytes;
  CHECK_THROWS_AS(load_vae(p.string()), DataError);
}
