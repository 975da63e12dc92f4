#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexda/corpus/batching.hpp"
#include "lexda/nn/layers.hpp"

namespace lexda::model {

using ad::Graph;
using ad::Mode;
using ad::Var;

/// Training setups. base: regression only. base-da: plus an adversarial
/// group discriminator. vae-da: plus VAE latent features. decoder-da: plus a
/// reconstruction decoder. multitask-da: masked-word prediction as an
/// auxiliary task with a task discriminator.
enum class Variant { base, base_da, vae_da, decoder_da, multitask_da };

std::string_view to_string(Variant v);
/// Throws ConfigError naming the valid variants.
Variant parse_variant(std::string_view name);
bool is_adversarial(Variant v);

struct ModelConfig {
  Variant variant = Variant::base_da;
  std::size_t char_embedding = 16;
  std::size_t char_hidden = 16;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t feed_forward = 128;
  nn::Pooling pooling = nn::Pooling::first_token;
  std::size_t head_hidden1 = 64;
  std::size_t head_hidden2 = 32;
  std::size_t z_dim = 16;
  std::size_t vae_hidden = 32;
  std::size_t decoder_embedding = 32;
  std::size_t decoder_hidden = 64;
  std::size_t decoder_projection = 64;
  std::size_t disc_hidden1 = 64;
  std::size_t disc_hidden2 = 32;
  nn::Activation disc_activation = nn::Activation::tanh;
  double dropout = 0.1;
  corpus::SequenceLimits limits;
  /// Discriminator label set (domains, languages, or tasks).
  std::vector<std::string> groups;
};

/// Index-mapped input of one example; tokens start with the [cls] id.
struct ModelInput {
  std::span<const int> chars;
  std::span<const int> tokens;
};

struct VaeState {
  Var mu;
  Var log_var;
  Var z;
  Var reconstruction;
  /// Standard-normal draw used for z (all zeros in eval mode).
  ad::Tensor noise;
};

/// Features of one example, concatenated as [target ; context ; latent].
struct FeatureBundle {
  Var target;                    // [2 * char_hidden]
  Var context;                   // [d_model]
  std::optional<Var> latent;     // [z_dim], vae-da only
  Var concat;
  Var hidden;                    // encoder states [n x d_model]
  std::optional<VaeState> vae;
};

struct RegressionOutput {
  Var prediction;  // [1], unclamped
  FeatureBundle features;
};

struct DecoderOutput {
  Var logits;          // [n x |tokens|]
  Var representation;  // GRU states [n x decoder_hidden]
};

/// The complete architecture: char-BiLSTM target encoder, transformer
/// context encoder, regression head, and the optional discriminator, VAE,
/// reconstruction decoder and masked-word head, all over one ParameterStore.
class CwiModel {
 public:
  CwiModel(ModelConfig config, std::size_t char_vocab, std::size_t token_vocab, std::uint64_t seed);
  CwiModel(const CwiModel&) = delete;
  CwiModel& operator=(const CwiModel&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  nn::ParameterStore& parameters() noexcept { return store_; }
  const nn::ParameterStore& parameters() const noexcept { return store_; }
  std::size_t char_vocab() const noexcept { return char_vocab_; }
  std::size_t token_vocab() const noexcept { return token_vocab_; }
  std::size_t feature_width() const noexcept;

  bool has_discriminator() const noexcept { return is_adversarial(config_.variant); }
  bool has_vae() const noexcept { return config_.variant == Variant::vae_da; }
  bool has_decoder() const noexcept { return config_.variant == Variant::decoder_da; }
  bool has_mlm() const noexcept { return config_.variant == Variant::multitask_da; }

  FeatureBundle extract(Graph& g, const ModelInput& input, Mode mode, Rng& rng) const;
  /// Regression head over feature rows: [B x F] -> [B], or [F] -> [1].
  Var regress(Graph& g, Var features, Mode mode, Rng& rng) const;
  RegressionOutput forward_regression(Graph& g, const ModelInput& input, Mode mode, Rng& rng) const;

  /// Group logits for feature rows behind a gradient reversal of the given
  /// scale (beta * lambda during training).
  Var discriminate(Graph& g, Var features, double reversal_scale) const;

  VaeState vae_forward(Graph& g, Var x, Mode mode, Rng& rng) const;
  /// Reparameterization with caller-supplied noise.
  VaeState vae_forward(Graph& g, Var x, ad::Tensor noise) const;

  /// Teacher-forced reconstruction of `ids` from encoder states `hidden`.
  DecoderOutput decode(Graph& g, Var hidden, std::span<const int> ids, Mode mode, Rng& rng) const;

  /// Vocabulary logits at `position` of encoder states `hidden`.
  Var mlm_logits(Graph& g, Var hidden, std::size_t position) const;
  /// Encodes `tokens` with tokens[position] replaced by the mask id.
  /// Throws ContractError for an out-of-range position.
  Var mask_and_predict(Graph& g, std::span<const int> tokens, std::size_t position, Mode mode,
                       Rng& rng) const;

  /// Parameters owned by the discriminator (receive un-reversed gradients).
  std::vector<ad::Parameter*> discriminator_parameters();

  const nn::TransformerEncoder& encoder() const noexcept { return encoder_; }

 private:
  ModelConfig config_;
  std::size_t char_vocab_;
  std::size_t token_vocab_;
  nn::ParameterStore store_;
  nn::Embedding char_embedding_;
  nn::BiLstmEncoder char_encoder_;
  nn::TransformerEncoder encoder_;
  nn::MlpHead head_;
  std::optional<nn::MlpHead> discriminator_;
  struct Vae {
    nn::Linear encode;
    nn::Linear mu;
    nn::Linear log_var;
    nn::Linear decode_hidden;
    nn::Linear decode_out;
  };
  std::optional<Vae> vae_;
  struct Decoder {
    nn::Embedding embedding;
    nn::GruCell gru;
    nn::Linear projection;
    nn::Linear output;
  };
  std::optional<Decoder> decoder_;
  std::optional<nn::Linear> mlm_;
};

/// Ids of one batch row in model form.
ModelInput input_of(const corpus::Batch& batch, std::size_t row);

}  // namespace lexda::model
