#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "lexda/error.hpp"
#include "lexda/nn/checkpoint.hpp"
#include "lexda/nn/layers.hpp"
#include "lexda/nn/vocabulary.hpp"

using namespace lexda;
using ad::Graph;
using ad::Tensor;
using ad::Var;

namespace {

bool near(const Tensor& a, const Tensor& b, double tol) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

void fill(ad::Parameter* p, double value) {
  for (auto& v : p->value.values()) v = value;
}

}  // namespace

TEST_SUITE("layers") {

TEST_CASE("embedding lookup and scatter") {
  nn::ParameterStore store;
  const auto emb = nn::Embedding::create(store, "e", 2, 2);
  emb.table->value = Tensor::matrix({{0, 0}, {1, 1}});
  Graph g;
  const int zero[] = {0};
  CHECK(emb(g, zero).value() == Tensor::matrix({{0, 0}}));

  const int ids[] = {1, 1};
  const auto grads = g.backward(ad::sum(emb(g, ids)));
  CHECK(grads[*emb.table] == Tensor::matrix({{0, 0}, {2, 2}}));

  const int bad[] = {2};
  CHECK_THROWS_AS(emb(g, bad), VocabularyError);
  const int negative[] = {-1};
  CHECK_THROWS_AS(emb(g, negative), VocabularyError);
}

TEST_CASE("padding row gets no gradient when masked downstream") {
  nn::ParameterStore store(3);
  const auto emb = nn::Embedding::create(store, "e", 4, 3);
  Graph g;
  const int ids[] = {2, 0, 0};
  const Var rows = emb(g, ids);
  const Var kept = ad::matmul(g.constant(Tensor::vector({1, 0, 0})), rows);
  const auto grad = g.backward(ad::sum(kept))[*emb.table];
  for (std::size_t c = 0; c < 3; ++c) CHECK(grad.at(0, c) == 0.0);
  for (std::size_t c = 0; c < 3; ++c) CHECK(grad.at(2, c) == 1.0);
}

TEST_CASE("bilstm shapes, symmetry and empty input") {
  nn::ParameterStore store(5);
  const auto enc = nn::BiLstmEncoder::create(store, "bi", 3, 16, 0.1);
  Rng rng(1);
  Graph g;
  CHECK(enc.encode(g, g.constant(Tensor::filled({4, 3}, 0.2)), ad::Mode::eval, rng).size() == 32);
  CHECK(enc.output_size() == 32);
  CHECK_THROWS_AS(enc.encode(g, g.constant(Tensor::zeros({3})), ad::Mode::eval, rng), ContractError);

  // tie the directions and feed a palindrome: both halves must agree
  nn::ParameterStore tied_store(8);
  auto tied = nn::BiLstmEncoder::create(tied_store, "bi", 3, 5, 0.0);
  tied.backward.w_input->value = tied.forward.w_input->value;
  tied.backward.w_hidden->value = tied.forward.w_hidden->value;
  Rng r = derive_rng(2, "bias");
  tied.forward.bias->value = testing::random_tensor(r, {20});
  tied.backward.bias->value = tied.forward.bias->value;
  const Tensor seq = Tensor::matrix({{0.1, -0.4, 0.7}, {0.9, 0.2, -0.3}, {0.5, 0.5, 0.5}, {0.9, 0.2, -0.3},
                                     {0.1, -0.4, 0.7}});
  const auto out = tied.encode(g, g.constant(seq), ad::Mode::eval, rng).value();
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(out[i] - out[5 + i]) < 1e-10);
}

TEST_CASE("gru fixed point and boundedness") {
  nn::ParameterStore store(2);
  const auto cell = nn::GruCell::create(store, "gru", 3, 4);
  fill(cell.b_input, 0.0);
  fill(cell.b_hidden, 0.0);
  Graph g;
  const auto h = cell.step(g, g.constant(Tensor::zeros({4})), g.constant(Tensor::zeros({3}))).value();
  CHECK(h == Tensor::zeros({4}));

  Rng rng = derive_rng(4, "gru");
  Var state = g.constant(Tensor::zeros({4}));
  for (int t = 0; t < 100; ++t) state = cell.step(g, state, g.constant(testing::random_tensor(rng, {3}, -5, 5)));
  CHECK(state.value().all_finite());
  for (double v : state.value().values()) CHECK(std::abs(v) <= 1.0);

  CHECK_THROWS_AS(cell.step(g, g.constant(Tensor::zeros({3})), g.constant(Tensor::zeros({3}))), DimensionError);
}

TEST_CASE("mlp head degenerate weights, eval determinism and width check") {
  nn::ParameterStore store(1);
  const auto head = nn::MlpHead::create(store, "mlp", 12, 6, 4, 1, 0.5);
  for (auto* p : store.all()) fill(p, 0.0);
  head.third.bias->value[0] = 0.37;
  Rng rng(3);
  Graph g;
  const Var x = g.constant(Tensor::filled({12}, 1.0));
  CHECK(head(g, x, ad::Mode::train, rng).value().item() == 0.37);

  nn::ParameterStore store2(9);
  const auto live = nn::MlpHead::create(store2, "mlp", 12, 6, 4, 1, 0.5);
  const double a = live(g, x, ad::Mode::eval, rng).value().item();
  const double b = live(g, x, ad::Mode::eval, rng).value().item();
  CHECK(a == b);
  CHECK_THROWS_AS(live(g, g.constant(Tensor::filled({11}, 1.0)), ad::Mode::eval, rng), DimensionError);
}

TEST_CASE("transformer attention rows, masking and padding neutrality") {
  nn::ParameterStore store(6);
  nn::EncoderConfig c;
  c.vocab = 10;
  c.d_model = 8;
  c.layers = 2;
  c.heads = 2;
  c.feed_forward = 16;
  c.max_len = 8;
  for (auto pooling : {nn::Pooling::first_token, nn::Pooling::mean}) {
    c.pooling = pooling;
    nn::ParameterStore s(6);
    const auto enc = nn::TransformerEncoder::create(s, "enc", c);
    Rng rng(0);
    Graph g;
    const int ids[] = {3, 5, 6, 0, 0};
    const std::vector<bool> mask{true, true, true, false, false};
    const auto out = enc.encode(g, ids, mask, ad::Mode::eval, rng);
    CHECK(out.attention.size() == 4);
    for (const auto& w : out.attention) {
      const auto& t = w.value();
      for (std::size_t r = 0; r < t.rows(); ++r) {
        double total = 0;
        for (std::size_t k = 0; k < t.cols(); ++k) total += t.at(r, k);
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(t.at(r, 3) == 0.0);
        CHECK(t.at(r, 4) == 0.0);
      }
    }

    const int other[] = {3, 5, 6, 9, 2};
    const auto swapped = enc.encode(g, other, mask, ad::Mode::eval, rng);
    CHECK(near(out.pooled.value(), swapped.pooled.value(), 1e-10));

    const int shorter[] = {3, 5, 6};
    const auto bare = enc.encode(g, shorter, {true, true, true}, ad::Mode::eval, rng);
    CHECK(near(out.pooled.value(), bare.pooled.value(), 1e-10));
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t k = 0; k < 8; ++k) {
        CHECK(std::abs(out.hidden.value().at(r, k) - bare.hidden.value().at(r, k)) < 1e-10);
      }
    }
    CHECK(out.pooled.size() == 8);
  }
  const auto enc = nn::TransformerEncoder::create(store, "enc", c);
  Rng rng(0);
  Graph g;
  const std::vector<int> long_ids(9, 4);
  CHECK_THROWS_AS(enc.encode(g, long_ids, std::vector<bool>(9, true), ad::Mode::eval, rng), ContractError);
}

TEST_CASE("initialization and dropout masks are deterministic") {
  auto build = [](nn::ParameterStore& s) {
    nn::EncoderConfig c;
    c.vocab = 12;
    c.d_model = 8;
    c.heads = 2;
    c.feed_forward = 8;
    return nn::TransformerEncoder::create(s, "enc", c);
  };
  nn::ParameterStore a(21), b(21), other(22);
  const auto ea = build(a);
  const auto eb = build(b);
  build(other);
  CHECK(nn::capture(a).tensors == nn::capture(b).tensors);
  CHECK(nn::capture(a).tensors != nn::capture(other).tensors);

  const int ids[] = {3, 7, 8, 9};
  const std::vector<bool> mask(4, true);
  Rng ra = derive_rng(5, "dropout"), rb = derive_rng(5, "dropout");
  Graph g;
  const Tensor pa = ea.encode(g, ids, mask, ad::Mode::train, ra).pooled.value();
  CHECK(pa == eb.encode(g, ids, mask, ad::Mode::train, rb).pooled.value());
}

TEST_CASE("parameter store names are unique") {
  nn::ParameterStore store;
  store.add("w", {2}, nn::Init::zeros);
  CHECK_THROWS_AS(store.add("w", {3}, nn::Init::zeros), ConfigError);
  CHECK(store.find("missing") == nullptr);
  CHECK(store.size() == 1);
}

TEST_CASE("vocabularies") {
  const std::u32string chars = U"bab";
  const auto cv = nn::CharVocabulary::from_characters(chars);
  CHECK(cv.size() == 2 + nn::CharVocabulary::reserved);
  CHECK(cv.index(U'a') == 2);
  CHECK(cv.index(U'b') == 3);
  CHECK(cv.index(U'z') == nn::CharVocabulary::unknown);
  CHECK(cv.character(cv.index(U'b')) == U'b');

  const std::vector<std::string> tokens{"zeta", "alpha", "alpha", "mid"};
  const auto tv = nn::TokenVocabulary::from_tokens(tokens);
  CHECK(tv.size() == 3 + nn::TokenVocabulary::reserved);
  for (const auto& t : tv.tokens()) CHECK(tv.token(tv.index(t)) == t);
  CHECK(tv.index("alpha") == nn::TokenVocabulary::reserved);
  CHECK(tv.index("unseen") == nn::TokenVocabulary::unknown);
  for (int id : tv.encode({"[mask]", "<mask>", "mask", "alpha"})) CHECK(id != nn::TokenVocabulary::mask);
}

}
