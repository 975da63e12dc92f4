#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "lexda/error.hpp"
#include "lexda/model/losses.hpp"
#include "lexda/training/optimizer.hpp"

using namespace lexda;
using ad::Graph;
using ad::Tensor;
using ad::Var;
using model::CwiModel;
using model::Variant;

namespace {

model::ModelConfig small_config(Variant variant, std::vector<std::string> groups = {"a", "b"}) {
  model::ModelConfig c;
  c.variant = variant;
  c.char_embedding = 4;
  c.char_hidden = 3;
  c.d_model = 8;
  c.layers = 1;
  c.heads = 2;
  c.feed_forward = 8;
  c.head_hidden1 = 6;
  c.head_hidden2 = 4;
  c.z_dim = 3;
  c.vae_hidden = 5;
  c.decoder_embedding = 3;
  c.decoder_hidden = 4;
  c.decoder_projection = 5;
  c.disc_hidden1 = 6;
  c.disc_hidden2 = 4;
  c.groups = std::move(groups);
  return c;
}

const std::vector<int> kChars{2, 3, 4};
const std::vector<int> kTokens{3, 4, 5, 6, 7};

double scalar_loss(Var v) { return v.value().item(); }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("regression losses") {
  Graph g;
  const std::vector<double> same{0.3, 0.6};
  for (auto kind : {model::RegressionKind::l1, model::RegressionKind::mse}) {
    CHECK(model::regression_loss(same, same, kind) == 0.0);
    CHECK(model::regression_loss(std::vector<double>{0, 1}, std::vector<double>{1, 0}, kind) == 1.0);
  }
  const std::vector<double> pred{0.2, 0.4, 0.9}, gold{0.1, 0.5, 0.7};
  CHECK(std::abs(model::regression_loss(pred, gold, model::RegressionKind::l1) - 0.4 / 3) < 1e-12);
  CHECK(std::abs(model::regression_loss(pred, gold, model::RegressionKind::mse) - 0.02) < 1e-12);
  const Var pv = g.constant(Tensor::vector(pred));
  CHECK(std::abs(scalar_loss(model::regression_loss(pv, gold, model::RegressionKind::l1)) - 0.4 / 3) < 1e-12);
  CHECK(std::abs(scalar_loss(model::regression_loss(pv, gold, model::RegressionKind::mse)) - 0.02) < 1e-12);
  CHECK_THROWS_AS(model::regression_loss(std::vector<double>{}, std::vector<double>{}, model::RegressionKind::l1),
                  ContractError);
  CHECK_THROWS_AS(model::regression_loss(pv, same, model::RegressionKind::l1), DimensionError);
}

TEST_CASE("cross entropy and decoder loss closed forms") {
  Graph g;
  const std::size_t one[] = {1};
  CHECK(std::abs(scalar_loss(model::cross_entropy(g.constant(Tensor::vector({0, 0, 0})), one)) - std::log(3.0)) < 1e-12);
  CHECK(scalar_loss(model::cross_entropy(g.constant(Tensor::vector({0, 50, 0})), one)) < 1e-20);
  const std::size_t out_of_range[] = {3};
  CHECK_THROWS_AS(model::cross_entropy(g.constant(Tensor::vector({0, 0, 0})), out_of_range), ContractError);

  const int target[] = {2};
  const Var flat = g.constant(Tensor::matrix({{0, 0, 0, 0}}));
  CHECK(std::abs(scalar_loss(model::decoder_loss(flat, target, -1)) - std::log(4.0)) < 1e-12);
  CHECK(std::abs(scalar_loss(model::decoder_loss(flat, target, -1)) - 1.386294) < 1e-6);
  CHECK(scalar_loss(model::decoder_loss(g.constant(Tensor::matrix({{0, 0, 50, 0}})), target, -1)) < 1e-20);
  const int ignored[] = {0, 0};
  CHECK(scalar_loss(model::decoder_loss(g.constant(Tensor::matrix({{1, 2, 3, 4}, {4, 3, 2, 1}})), ignored, 0)) == 0.0);
  const int bad[] = {4};
  CHECK_THROWS_AS(model::decoder_loss(flat, bad, -1), VocabularyError);

  Rng rng = derive_rng(3, "ce");
  const Tensor logits = testing::random_tensor(rng, {1, 5}, -2, 2);
  const std::size_t label[] = {3};
  const int id[] = {3};
  CHECK(std::abs(scalar_loss(model::cross_entropy(g.constant(logits), label)) -
                 scalar_loss(model::decoder_loss(g.constant(logits), id, -1))) < 1e-14);

  const double weights[] = {1, 1, 1, 2.5};
  const int last[] = {3};
  CHECK(std::abs(scalar_loss(model::decoder_loss(flat, last, -1, weights)) - 2.5 * std::log(4.0)) < 1e-12);
}

TEST_CASE("kl divergence and vae loss closed forms") {
  Graph g;
  auto kl = [&](std::vector<double> mu, std::vector<double> log_var) {
    return scalar_loss(model::kl_divergence(g.constant(Tensor::vector(std::move(mu))),
                                            g.constant(Tensor::vector(std::move(log_var)))));
  };
  CHECK(kl({0}, {0}) == 0.0);
  CHECK(std::abs(kl({1}, {0}) - 0.5) < 1e-12);
  CHECK(std::abs(kl({0}, {std::log(2.0)}) - 0.5 * (1.0 - std::log(2.0))) < 1e-12);
  CHECK(std::abs(kl({0}, {std::log(2.0)}) - 0.153426) < 1e-6);
  CHECK_THROWS_AS(kl({0}, {std::numeric_limits<double>::infinity()}), NumericError);

  model::VaeState s;
  s.mu = g.constant(Tensor::vector({0, 0}));
  s.log_var = g.constant(Tensor::vector({0, 0}));
  s.reconstruction = g.constant(Tensor::vector({0.3, -0.2, 0.9}));
  CHECK(scalar_loss(model::vae_loss(s, g.constant(Tensor::vector({0.3, -0.2, 0.9})))) == 0.0);
}

TEST_CASE("closed-form kl agrees with monte carlo") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng = derive_rng(seed, "kl");
    const std::size_t dim = 1 + uniform_index(rng, 4);
    const Tensor mu = testing::random_tensor(rng, {dim}, -1, 1);
    const Tensor log_var = testing::random_tensor(rng, {dim}, -1, 1);
    Graph g;
    const double closed = scalar_loss(model::kl_divergence(g.constant(mu), g.constant(log_var)));

    // log q(z) - log p(z) under z ~ q, sampled with an independent generator
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal;
    const std::size_t n = 200000;
    double mean = 0, m2 = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      double log_ratio = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double eps = normal(engine);
        const double z = mu[i] + std::exp(0.5 * log_var[i]) * eps;
        log_ratio += -0.5 * log_var[i] - 0.5 * eps * eps + 0.5 * z * z;
      }
      const double delta = log_ratio - mean;
      mean += delta / static_cast<double>(k);
      m2 += delta * (log_ratio - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    CHECK(std::abs(mean - closed) < 3 * se);
  }
}

TEST_CASE("compose loss") {
  model::LossWeights w;
  model::LossParts<double> p;
  p.regression = 1.0;
  p.discriminator = 0.5;
  CHECK(std::abs(model::compose_loss(p, w, 0.5, Variant::base_da) - 0.95) < 1e-12);
  CHECK(model::compose_loss(p, w, 0.0, Variant::base_da) == 1.0);
  CHECK_THROWS_AS(model::compose_loss(p, w, 0.5, Variant::vae_da), ConfigError);
  p.vae = 2.0;
  CHECK(std::abs(model::compose_loss(p, w, 0.5, Variant::vae_da) - 1.15) < 1e-12);

  const double once = model::compose_loss(p, w, 0.5, Variant::vae_da) - model::compose_loss(p, w, 0.5, Variant::base_da);
  auto doubled = p;
  doubled.vae = 4.0;
  const double twice =
      model::compose_loss(doubled, w, 0.5, Variant::vae_da) - model::compose_loss(doubled, w, 0.5, Variant::base_da);
  CHECK(std::abs(twice - 2 * once) < 1e-15);

  p.decoder = 3.0;
  auto zero_alpha = w;
  zero_alpha.alpha_vae = 0;
  zero_alpha.alpha_dec = 0;
  const double eq1 = model::compose_loss(p, w, 0.3, Variant::base_da);
  CHECK(model::compose_loss(p, zero_alpha, 0.3, Variant::vae_da) == eq1);
  CHECK(model::compose_loss(p, zero_alpha, 0.3, Variant::decoder_da) == eq1);

  model::LossParts<double> multi;
  multi.regression = 0.4;
  multi.mlm = 2.0;
  multi.task = 0.7;
  CHECK(std::abs(model::compose_loss(multi, w, 0.5, Variant::multitask_da) - (0.4 + 2.0 - 0.01 * 0.1 * 0.7)) < 1e-12);
  CHECK(model::compose_loss(multi, w, 0.0, Variant::multitask_da) == 0.4 + 2.0);

  model::LossWeights bad;
  bad.beta = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.gamma = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("regression forward contracts") {
  CwiModel m(small_config(Variant::base), 6, 9, 4);
  Rng rng(0);
  Graph g;
  const model::ModelInput input{kChars, kTokens};
  const auto out = m.forward_regression(g, input, ad::Mode::eval, rng);
  CHECK(out.prediction.size() == 1);
  CHECK(out.features.target.size() == 6);
  CHECK(out.features.context.size() == 8);
  CHECK(out.features.concat.size() == m.feature_width());
  CHECK(!out.features.latent);
  CHECK(out.prediction.value().item() == m.forward_regression(g, input, ad::Mode::eval, rng).prediction.value().item());

  for (auto* p : m.parameters().all()) {
    for (auto& v : p->value.values()) v = 0.0;
  }
  m.parameters().at("head.third.bias").value[0] = 0.42;
  Graph fresh;
  CHECK(m.forward_regression(fresh, input, ad::Mode::eval, rng).prediction.value().item() == 0.42);

  const std::vector<int> unknown_char{6};
  CHECK_THROWS_AS(m.forward_regression(fresh, {unknown_char, kTokens}, ad::Mode::eval, rng), VocabularyError);
  CHECK_THROWS_AS(m.forward_regression(fresh, {std::span<const int>{}, kTokens}, ad::Mode::eval, rng), ContractError);
}

TEST_CASE("feature concatenation order") {
  CwiModel m(small_config(Variant::vae_da), 6, 9, 4);
  Rng rng(0);
  Graph g;
  const auto f = m.extract(g, {kChars, kTokens}, ad::Mode::eval, rng);
  REQUIRE(f.latent);
  CHECK(f.concat.size() == 6 + 8 + 3);
  const Tensor concat = f.concat.value();
  for (std::size_t i = 0; i < 6; ++i) CHECK(concat[i] == f.target.value()[i]);
  for (std::size_t i = 0; i < 8; ++i) CHECK(concat[6 + i] == f.context.value()[i]);
  for (std::size_t i = 0; i < 3; ++i) CHECK(concat[14 + i] == f.latent->value()[i]);
}

TEST_CASE("discriminator") {
  CHECK_THROWS_AS(CwiModel(small_config(Variant::base_da, {"only"}), 6, 9, 1), ConfigError);
  CwiModel base(small_config(Variant::base), 6, 9, 1);
  Graph g;
  CHECK_THROWS_AS(base.discriminate(g, g.constant(Tensor::zeros({14})), 0.1), ConfigError);

  CwiModel m(small_config(Variant::base_da, {"biblical", "biomedical", "political"}), 6, 9, 1);
  const Var features = g.constant(Tensor::filled({14}, 0.3));
  CHECK(m.discriminate(g, features, 0.1).size() == 3);
  for (auto* p : m.discriminator_parameters()) {
    for (auto& v : p->value.values()) v = 0.0;
  }
  Graph fresh;
  const auto probs = ad::softmax(m.discriminate(fresh, fresh.constant(Tensor::filled({14}, 0.3)), 0.1)).value();
  for (double p : probs.values()) CHECK(std::abs(p - 1.0 / 3) < 1e-15);
}

TEST_CASE("vae reparameterization") {
  CwiModel m(small_config(Variant::vae_da), 6, 9, 2);
  Graph g;
  const Var x = g.constant(Tensor::vector({0.1, 0.2, -0.3, 0.4, 0.0, -0.5, 0.6, 0.7}));
  const auto s = m.vae_forward(g, x, Tensor::zeros({3}));
  const Tensor mu = s.mu.value();
  CHECK(s.z.value() == mu);
  CHECK(s.reconstruction.size() == 8);
  Rng rng(1);
  const Tensor eval_z = m.vae_forward(g, x, ad::Mode::eval, rng).z.value();
  CHECK(eval_z == mu);
  CHECK_THROWS_AS(m.vae_forward(g, x, Tensor::zeros({2})), DimensionError);
}

TEST_CASE("decoder output rows") {
  CwiModel m(small_config(Variant::decoder_da), 6, 9, 2);
  Rng rng(1);
  Graph g;
  const auto f = m.extract(g, {kChars, kTokens}, ad::Mode::eval, rng);
  const auto out = m.decode(g, f.hidden, kTokens, ad::Mode::eval, rng);
  CHECK(out.logits.value().rows() == kTokens.size());
  CHECK(out.logits.value().cols() == 9);
  CHECK(out.representation.value().rows() == kTokens.size());
}

TEST_CASE("mask and predict") {
  CwiModel m(small_config(Variant::multitask_da, {"complexity", "simplification"}), 6, 12, 3);
  Rng rng(1);
  Graph g;
  const auto logits = m.mask_and_predict(g, kTokens, 2, ad::Mode::eval, rng);
  CHECK(logits.size() == m.token_vocab());

  std::vector<int> masked = kTokens;
  masked[2] = nn::TokenVocabulary::mask;
  const auto manual = m.encoder().encode(g, masked, std::vector<bool>(masked.size(), true), ad::Mode::eval, rng);
  CHECK(m.mlm_logits(g, manual.hidden, 2).value() == logits.value());
  CHECK_THROWS_AS(m.mask_and_predict(g, kTokens, kTokens.size(), ad::Mode::eval, rng), ContractError);

  // overfit one masked sentence
  training::OptimizerConfig oc;
  oc.learning_rate = 1e-2;
  oc.weight_decay = 0;
  training::AdamW opt(oc, m.parameters().all());
  const std::size_t answer[] = {static_cast<std::size_t>(kTokens[2])};
  double loss = 0;
  for (int step = 0; step < 50; ++step) {
    Graph tape;
    Rng drop = derive_rng(static_cast<std::uint64_t>(step), "drop");
    const Var l = model::cross_entropy(m.mask_and_predict(tape, kTokens, 2, ad::Mode::train, drop), answer);
    opt.step(tape.backward(l));
  }
  Graph eval_graph;
  loss = scalar_loss(model::cross_entropy(m.mask_and_predict(eval_graph, kTokens, 2, ad::Mode::eval, rng), answer));
  CHECK(loss < 0.1);
}

TEST_CASE("gradient decomposition through the reversal") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CwiModel m(small_config(Variant::base_da), 6, 9, seed);
    const double beta = 0.2, lambda = training::lambda_schedule(seed + 2, 0.1);
    const double gold[] = {0.35};
    const std::size_t label[] = {seed % 2};
    const model::ModelInput input{kChars, kTokens};
    const auto& store = m.parameters();

    Graph total;
    Rng r1(0);
    const auto out = m.forward_regression(total, input, ad::Mode::eval, r1);
    model::LossParts<Var> parts;
    parts.regression = model::regression_loss(out.prediction, gold, model::RegressionKind::l1);
    parts.discriminator = model::cross_entropy(m.discriminate(total, out.features.concat, beta * lambda), label);
    const auto g_total = total.backward(model::training_loss(parts, {}, Variant::base_da));

    Graph reg;
    Rng r2(0);
    const auto g_r = reg.backward(model::regression_loss(
        m.forward_regression(reg, input, ad::Mode::eval, r2).prediction, gold, model::RegressionKind::l1));

    // discriminator rebuilt from its parameters, no reversal anywhere
    Graph dis;
    Rng r3(0);
    auto& s = m.parameters();
    auto linear = [&](const std::string& name) {
      return nn::Linear{&s.at("discriminator." + name + ".weight"), &s.at("discriminator." + name + ".bias")};
    };
    const nn::MlpHead plain{linear("first"), linear("second"), linear("third"), 0.0, nn::Activation::tanh};
    const auto feats = m.extract(dis, input, ad::Mode::eval, r3);
    const auto g_d = dis.backward(model::cross_entropy(plain(dis, feats.concat, ad::Mode::eval, r3), label));

    const auto disc = m.discriminator_parameters();
    for (const auto* p : store.all()) {
      const bool is_disc = std::find(disc.begin(), disc.end(), p) != disc.end();
      const Tensor a = g_total[*p], r = g_r[*p], d = g_d[*p];
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double expected = is_disc ? d[i] : r[i] - beta * lambda * d[i];
        INFO(p->name << "[" << i << "]");
        CHECK(std::abs(a[i] - expected) < 1e-10);
      }
    }
  }
}

}
