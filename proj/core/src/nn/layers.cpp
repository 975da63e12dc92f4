#include "lexda/nn/layers.hpp"

#include <cmath>

#include "lexda/error.hpp"

namespace lexda::nn {

Linear Linear::create(ParameterStore& store, const std::string& name, std::size_t in,
                      std::size_t out) {
  Linear l;
  l.weight = &store.add(name + ".weight", {in, out}, Init::glorot_uniform);
  l.bias = &store.add(name + ".bias", {out}, Init::zeros);
  return l;
}

Var Linear::operator()(Graph& g, Var x) const {
  if (x.value().cols() != in()) {
    throw DimensionError("linear layer '" + weight->name + "' expects width " + std::to_string(in()) +
                         ", got " + ad::shape_string(x.shape()));
  }
  return ad::add_bias(ad::matmul(x, g.parameter(*weight)), g.parameter(*bias));
}

Embedding Embedding::create(ParameterStore& store, const std::string& name, std::size_t vocab,
                            std::size_t dim) {
  return Embedding{&store.add(name + ".table", {vocab, dim}, Init::embedding_normal)};
}

Var Embedding::operator()(Graph& g, std::span<const int> indices) const {
  return ad::gather_rows(g.parameter(*table), indices);
}

LstmCell LstmCell::create(ParameterStore& store, const std::string& name, std::size_t input,
                          std::size_t hidden) {
  LstmCell c;
  c.w_input = &store.add(name + ".w_input", {input, 4 * hidden}, Init::glorot_uniform);
  c.w_hidden = &store.add(name + ".w_hidden", {hidden, 4 * hidden}, Init::glorot_uniform);
  c.bias = &store.add(name + ".bias", {4 * hidden}, Init::zeros);
  return c;
}

Var LstmCell::run(Graph& g, Var seq, bool reverse) const {
  const std::size_t n = seq.value().rows();
  const std::size_t h = hidden();
  // input projections for every step at once: [n x 4h]
  const Var projected = ad::add_bias(ad::matmul(seq, g.parameter(*w_input)), g.parameter(*bias));
  const Var wh = g.parameter(*w_hidden);
  Var state = g.constant(ad::Tensor::zeros({h}));
  Var cell = state;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    const Var z = ad::row(projected, t) + ad::matmul(state, wh);
    const Var gates = ad::sigmoid(ad::slice_cols(z, 0, 3 * h));
    const Var candidate = ad::tanh(ad::slice_cols(z, 3 * h, 4 * h));
    const Var in_gate = ad::slice_cols(gates, 0, h);
    const Var forget_gate = ad::slice_cols(gates, h, 2 * h);
    const Var out_gate = ad::slice_cols(gates, 2 * h, 3 * h);
    cell = forget_gate * cell + in_gate * candidate;
    state = out_gate * ad::tanh(cell);
  }
  return state;
}

BiLstmEncoder BiLstmEncoder::create(ParameterStore& store, const std::string& name,
                                    std::size_t input, std::size_t hidden, double dropout_rate) {
  return BiLstmEncoder{LstmCell::create(store, name + ".forward", input, hidden),
                       LstmCell::create(store, name + ".backward", input, hidden), dropout_rate};
}

Var BiLstmEncoder::encode(Graph& g, Var seq, Mode mode, Rng& rng) const {
  if (seq.value().rank() != 2 || seq.value().rows() == 0) {
    throw ContractError("bilstm_encode needs an [n x d] sequence; pad empty targets first");
  }
  const Var fw = forward.run(g, seq, false);
  const Var bw = backward.run(g, seq, true);
  const Var both[] = {fw, bw};
  return ad::dropout(ad::concat_cols(both), dropout_rate, mode, rng);
}

GruCell GruCell::create(ParameterStore& store, const std::string& name, std::size_t input,
                        std::size_t hidden) {
  GruCell c;
  c.w_input = &store.add(name + ".w_input", {input, 3 * hidden}, Init::glorot_uniform);
  c.w_hidden = &store.add(name + ".w_hidden", {hidden, 3 * hidden}, Init::glorot_uniform);
  c.b_input = &store.add(name + ".b_input", {3 * hidden}, Init::zeros);
  c.b_hidden = &store.add(name + ".b_hidden", {3 * hidden}, Init::zeros);
  return c;
}

Var GruCell::step(Graph& g, Var hidden_state, Var input_value) const {
  const std::size_t h = hidden();
  if (hidden_state.size() != h || input_value.size() != input()) {
    throw DimensionError("gru_step: hidden " + ad::shape_string(hidden_state.shape()) + " / input " +
                         ad::shape_string(input_value.shape()) + " do not match cell [" +
                         std::to_string(input()) + " -> " + std::to_string(h) + "]");
  }
  const Var xi = ad::add_bias(ad::matmul(input_value, g.parameter(*w_input)), g.parameter(*b_input));
  const Var hh = ad::add_bias(ad::matmul(hidden_state, g.parameter(*w_hidden)), g.parameter(*b_hidden));
  const Var gates = ad::sigmoid(ad::slice_cols(xi, 0, 2 * h) + ad::slice_cols(hh, 0, 2 * h));
  const Var reset = ad::slice_cols(gates, 0, h);
  const Var update = ad::slice_cols(gates, h, 2 * h);
  const Var candidate =
      ad::tanh(ad::slice_cols(xi, 2 * h, 3 * h) + reset * ad::slice_cols(hh, 2 * h, 3 * h));
  // h' = (1 - z) * n + z * h  ==  n + z * (h - n)
  return candidate + update * (hidden_state - candidate);
}

MlpHead MlpHead::create(ParameterStore& store, const std::string& name, std::size_t in,
                        std::size_t hidden1, std::size_t hidden2, std::size_t out,
                        double dropout_rate, Activation activation) {
  return MlpHead{Linear::create(store, name + ".first", in, hidden1),
                 Linear::create(store, name + ".second", hidden1, hidden2),
                 Linear::create(store, name + ".third", hidden2, out), dropout_rate, activation};
}

Var MlpHead::operator()(Graph& g, Var x, Mode mode, Rng& rng) const {
  const auto act = activation == Activation::relu ? ad::Unary::relu : ad::Unary::tanh;
  Var h = ad::elementwise(act, first(g, x));
  h = ad::dropout(h, dropout_rate, mode, rng);
  h = ad::elementwise(act, second(g, h));
  return third(g, h);
}

TransformerEncoder TransformerEncoder::create(ParameterStore& store, const std::string& name,
                                              const EncoderConfig& config) {
  if (config.heads == 0 || config.d_model % config.heads != 0) {
    throw ConfigError("d_model " + std::to_string(config.d_model) + " is not divisible by " +
                      std::to_string(config.heads) + " heads");
  }
  if (config.vocab <= 1) throw ConfigError("encoder vocabulary is empty");
  TransformerEncoder enc;
  enc.config_ = config;
  enc.embedding_ = Embedding::create(store, name + ".tokens", config.vocab, config.d_model);
  const std::size_t d = config.d_model;
  for (std::size_t b = 0; b < config.layers; ++b) {
    const std::string prefix = name + ".block" + std::to_string(b);
    Block block;
    block.qkv = Linear::create(store, prefix + ".attention.qkv", d, 3 * d);
    block.out = Linear::create(store, prefix + ".attention.out", d, d);
    block.norm1_gain = &store.add(prefix + ".norm1.gain", {d}, Init::ones);
    block.norm1_offset = &store.add(prefix + ".norm1.offset", {d}, Init::zeros);
    block.ff1 = Linear::create(store, prefix + ".ff1", d, config.feed_forward);
    block.ff2 = Linear::create(store, prefix + ".ff2", config.feed_forward, d);
    block.norm2_gain = &store.add(prefix + ".norm2.gain", {d}, Init::ones);
    block.norm2_offset = &store.add(prefix + ".norm2.offset", {d}, Init::zeros);
    enc.blocks_.push_back(block);
  }
  enc.pooler_ = Linear::create(store, name + ".pooler", d, d);
  return enc;
}

ad::Tensor TransformerEncoder::positional_encoding(std::size_t length, std::size_t d_model) {
  ad::Tensor pe({length, d_model});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d_model; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      pe.at(pos, i) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Var TransformerEncoder::attend(Graph& g, const Block& block, Var x, const std::vector<bool>& mask,
                               std::vector<Var>& attention) const {
  const std::size_t d = config_.d_model;
  const std::size_t dk = d / config_.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  const Var qkv = block.qkv(g, x);
  std::vector<Var> heads;
  heads.reserve(config_.heads);
  for (std::size_t h = 0; h < config_.heads; ++h) {
    const Var q = ad::slice_cols(qkv, h * dk, (h + 1) * dk);
    const Var k = ad::slice_cols(qkv, d + h * dk, d + (h + 1) * dk);
    const Var v = ad::slice_cols(qkv, 2 * d + h * dk, 2 * d + (h + 1) * dk);
    const Var weights = ad::masked_softmax(ad::scale(ad::matmul(q, ad::transpose(k)), scale), mask);
    attention.push_back(weights);
    heads.push_back(ad::matmul(weights, v));
  }
  return block.out(g, ad::concat_cols(heads));
}

EncoderOutput TransformerEncoder::encode(Graph& g, std::span<const int> ids,
                                         const std::vector<bool>& mask, Mode mode, Rng& rng) const {
  const std::size_t n = ids.size();
  if (n == 0) throw ContractError("transformer_encode: empty token sequence");
  if (n > config_.max_len) {
    throw ContractError("transformer_encode: sequence of " + std::to_string(n) +
                        " tokens exceeds the configured maximum " + std::to_string(config_.max_len));
  }
  if (mask.size() != n) throw DimensionError("transformer_encode: mask length differs from ids");
  const double rate = config_.dropout_rate;

  EncoderOutput out;
  Var x = ad::scale(embedding_(g, ids), std::sqrt(static_cast<double>(config_.d_model)));
  x = x + g.constant(positional_encoding(n, config_.d_model));
  x = ad::dropout(x, rate, mode, rng);
  for (const Block& block : blocks_) {
    const Var attended = ad::dropout(attend(g, block, x, mask, out.attention), rate, mode, rng);
    x = ad::layer_norm(x + attended, g.parameter(*block.norm1_gain),
                       g.parameter(*block.norm1_offset));
    const Var ff = block.ff2(g, ad::relu(block.ff1(g, x)));
    x = ad::layer_norm(x + ad::dropout(ff, rate, mode, rng), g.parameter(*block.norm2_gain),
                       g.parameter(*block.norm2_offset));
  }
  out.hidden = x;

  Var summary;
  if (config_.pooling == Pooling::first_token) {
    if (!mask[0]) throw ContractError("transformer_encode: first position is padding");
    summary = ad::row(x, 0);
  } else {
    std::size_t real = 0;
    for (bool m : mask) real += m ? 1 : 0;
    ad::Tensor weights({n});
    for (std::size_t i = 0; i < n; ++i) weights[i] = mask[i] ? 1.0 / static_cast<double>(real) : 0.0;
    summary = ad::matmul(g.constant(std::move(weights)), x);
  }
  out.pooled = ad::tanh(pooler_(g, summary));
  return out;
}

}  // namespace lexda::nn
