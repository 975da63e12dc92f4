#include "lexda/model/cwi_model.hpp"

#include <array>
#include <cmath>

#include "lexda/error.hpp"

namespace lexda::model {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 5> kVariants{{
    {Variant::base, "base"},
    {Variant::base_da, "base-da"},
    {Variant::vae_da, "vae-da"},
    {Variant::decoder_da, "decoder-da"},
    {Variant::multitask_da, "multitask-da"},
}};

nn::EncoderConfig encoder_config(const ModelConfig& c, std::size_t token_vocab) {
  nn::EncoderConfig e;
  e.vocab = token_vocab;
  e.d_model = c.d_model;
  e.layers = c.layers;
  e.heads = c.heads;
  e.feed_forward = c.feed_forward;
  e.max_len = c.limits.max_tokens;
  e.dropout_rate = c.dropout;
  e.pooling = c.pooling;
  return e;
}

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [value, name] : kVariants) {
    if (value == v) return name;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  std::string valid;
  for (const auto& [value, n] : kVariants) {
    if (n == name) return value;
    valid += valid.empty() ? "" : ", ";
    valid += n;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "' (valid: " + valid + ")");
}

bool is_adversarial(Variant v) { return v != Variant::base; }

CwiModel::CwiModel(ModelConfig config, std::size_t char_vocab, std::size_t token_vocab,
                   std::uint64_t seed)
    : config_(std::move(config)),
      char_vocab_(char_vocab),
      token_vocab_(token_vocab),
      store_(seed) {
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
  if (config_.char_embedding == 0 || config_.char_hidden == 0 || config_.head_hidden1 == 0 ||
      config_.head_hidden2 == 0) {
    throw ConfigError("model sizes must be positive");
  }
  if (char_vocab_ <= 1) throw ConfigError("character vocabulary is empty");
  if (has_discriminator() && config_.groups.size() < 2) {
    throw ConfigError("variant " + std::string(to_string(config_.variant)) +
                      " needs at least 2 discriminator groups, got " +
                      std::to_string(config_.groups.size()));
  }

  char_embedding_ = nn::Embedding::create(store_, "chars", char_vocab_, config_.char_embedding);
  char_encoder_ = nn::BiLstmEncoder::create(store_, "target", config_.char_embedding,
                                            config_.char_hidden, config_.dropout);
  encoder_ = nn::TransformerEncoder::create(store_, "context", encoder_config(config_, token_vocab_));
  if (has_vae()) {
    if (config_.z_dim == 0 || config_.vae_hidden == 0) throw ConfigError("VAE sizes must be positive");
    vae_ = Vae{nn::Linear::create(store_, "vae.encode", config_.d_model, config_.vae_hidden),
               nn::Linear::create(store_, "vae.mu", config_.vae_hidden, config_.z_dim),
               nn::Linear::create(store_, "vae.log_var", config_.vae_hidden, config_.z_dim),
               nn::Linear::create(store_, "vae.decode_hidden", config_.z_dim, config_.vae_hidden),
               nn::Linear::create(store_, "vae.decode_out", config_.vae_hidden, config_.d_model)};
  }
  head_ = nn::MlpHead::create(store_, "head", feature_width(), config_.head_hidden1,
                              config_.head_hidden2, 1, config_.dropout);
  if (has_discriminator()) {
    discriminator_ = nn::MlpHead::create(store_, "discriminator", feature_width(),
                                         config_.disc_hidden1, config_.disc_hidden2,
                                         config_.groups.size(), 0.0, config_.disc_activation);
  }
  if (has_decoder()) {
    decoder_ = Decoder{
        nn::Embedding::create(store_, "decoder.embedding", token_vocab_, config_.decoder_embedding),
        nn::GruCell::create(store_, "decoder.gru", config_.d_model + config_.decoder_embedding,
                            config_.decoder_hidden),
        nn::Linear::create(store_, "decoder.projection", config_.decoder_hidden,
                           config_.decoder_projection),
        nn::Linear::create(store_, "decoder.output", config_.decoder_projection, token_vocab_)};
  }
  if (has_mlm()) mlm_ = nn::Linear::create(store_, "mlm", config_.d_model, token_vocab_);
}

std::size_t CwiModel::feature_width() const noexcept {
  return 2 * config_.char_hidden + config_.d_model + (has_vae() ? config_.z_dim : 0);
}

FeatureBundle CwiModel::extract(Graph& g, const ModelInput& input, Mode mode, Rng& rng) const {
  if (input.chars.empty()) throw ContractError("example has no target characters");
  FeatureBundle f;
  f.target = char_encoder_.encode(g, char_embedding_(g, input.chars), mode, rng);
  const std::vector<bool> mask(input.tokens.size(), true);
  auto encoded = encoder_.encode(g, input.tokens, mask, mode, rng);
  f.hidden = encoded.hidden;
  f.context = encoded.pooled;
  if (has_vae()) {
    f.vae = vae_forward(g, f.context, mode, rng);
    f.latent = f.vae->z;
    const Var parts[] = {f.target, f.context, *f.latent};
    f.concat = ad::concat_cols(parts);
  } else {
    const Var parts[] = {f.target, f.context};
    f.concat = ad::concat_cols(parts);
  }
  return f;
}

Var CwiModel::regress(Graph& g, Var features, Mode mode, Rng& rng) const {
  Var out = head_(g, features, mode, rng);
  if (out.value().rank() == 2) out = ad::reshape(out, {out.value().rows()});
  return out;
}

RegressionOutput CwiModel::forward_regression(Graph& g, const ModelInput& input, Mode mode,
                                              Rng& rng) const {
  auto features = extract(g, input, mode, rng);
  Var prediction = regress(g, features.concat, mode, rng);
  return {prediction, std::move(features)};
}

Var CwiModel::discriminate(Graph& g, Var features, double reversal_scale) const {
  if (!discriminator_) {
    throw ConfigError("variant " + std::string(to_string(config_.variant)) +
                      " has no discriminator");
  }
  Rng unused(0);
  return (*discriminator_)(g, ad::grad_reverse(features, reversal_scale), Mode::eval, unused);
}

VaeState CwiModel::vae_forward(Graph& g, Var x, Mode mode, Rng& rng) const {
  if (!vae_) throw ConfigError("variant has no VAE branch");
  ad::Tensor noise = ad::Tensor::zeros({config_.z_dim});
  if (mode == Mode::train) {
    for (auto& v : noise.values()) v = standard_normal(rng);
  }
  return vae_forward(g, x, std::move(noise));
}

VaeState CwiModel::vae_forward(Graph& g, Var x, ad::Tensor noise) const {
  if (!vae_) throw ConfigError("variant has no VAE branch");
  if (noise.size() != config_.z_dim) {
    throw DimensionError("VAE noise has " + std::to_string(noise.size()) + " values, z_dim is " +
                         std::to_string(config_.z_dim));
  }
  VaeState s;
  const Var h = ad::relu(vae_->encode(g, x));
  s.mu = vae_->mu(g, h);
  s.log_var = vae_->log_var(g, h);
  const Var sigma = ad::exp(0.5 * s.log_var);
  s.z = s.mu + sigma * g.constant(noise);
  s.reconstruction = vae_->decode_out(g, ad::relu(vae_->decode_hidden(g, s.z)));
  s.noise = std::move(noise);
  return s;
}

DecoderOutput CwiModel::decode(Graph& g, Var hidden, std::span<const int> ids, Mode mode,
                               Rng& rng) const {
  if (!decoder_) throw ConfigError("variant has no reconstruction decoder");
  const std::size_t n = ids.size();
  if (n == 0 || hidden.value().rank() != 2 || hidden.value().rows() != n) {
    throw DimensionError("decoder needs one encoder state per target id");
  }
  std::vector<int> previous(n, nn::TokenVocabulary::padding);
  for (std::size_t t = 1; t < n; ++t) previous[t] = ids[t - 1];
  const Var parts[] = {hidden, decoder_->embedding(g, previous)};
  const Var inputs = ad::concat_cols(parts);

  Var state = g.constant(ad::Tensor::zeros({decoder_->gru.hidden()}));
  std::vector<Var> states;
  states.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    state = decoder_->gru.step(g, state, ad::row(inputs, t));
    states.push_back(state);
  }
  DecoderOutput out;
  out.representation = ad::concat_rows(states);
  const Var projected =
      ad::dropout(decoder_->projection(g, out.representation), config_.dropout, mode, rng);
  out.logits = decoder_->output(g, projected);
  return out;
}

Var CwiModel::mlm_logits(Graph& g, Var hidden, std::size_t position) const {
  if (!mlm_) throw ConfigError("variant has no masked-word head");
  return (*mlm_)(g, ad::row(hidden, position));
}

Var CwiModel::mask_and_predict(Graph& g, std::span<const int> tokens, std::size_t position,
                               Mode mode, Rng& rng) const {
  if (position >= tokens.size()) {
    throw ContractError("mask position " + std::to_string(position) + " outside sentence of " +
                        std::to_string(tokens.size()) + " tokens");
  }
  std::vector<int> masked(tokens.begin(), tokens.end());
  masked[position] = nn::TokenVocabulary::mask;
  const std::vector<bool> mask(masked.size(), true);
  const auto encoded = encoder_.encode(g, masked, mask, mode, rng);
  return mlm_logits(g, encoded.hidden, position);
}

std::vector<ad::Parameter*> CwiModel::discriminator_parameters() {
  return store_.with_prefix("discriminator.");
}

ModelInput input_of(const corpus::Batch& batch, std::size_t row) {
  return {batch.char_row(row), batch.token_row(row)};
}

}  // namespace lexda::model
