#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lexda/autodiff/ops.hpp"
#include "lexda/nn/parameters.hpp"

namespace lexda::nn {

using ad::Graph;
using ad::Mode;
using ad::Var;

/// Affine map y = x W + b over the rows of x.
struct Linear {
  ad::Parameter* weight = nullptr;  // [in x out]
  ad::Parameter* bias = nullptr;    // [out]

  static Linear create(ParameterStore& store, const std::string& name, std::size_t in,
                       std::size_t out);
  std::size_t in() const { return weight->value.shape()[0]; }
  std::size_t out() const { return weight->value.shape()[1]; }
  Var operator()(Graph& g, Var x) const;
};

struct Embedding {
  ad::Parameter* table = nullptr;  // [vocab x dim]

  static Embedding create(ParameterStore& store, const std::string& name, std::size_t vocab,
                          std::size_t dim);
  std::size_t dim() const { return table->value.shape()[1]; }
  /// Row gather; out-of-range indices raise VocabularyError.
  Var operator()(Graph& g, std::span<const int> indices) const;
};

/// Single-direction LSTM with gate layout [input | forget | output | cell].
struct LstmCell {
  ad::Parameter* w_input = nullptr;   // [d x 4h]
  ad::Parameter* w_hidden = nullptr;  // [h x 4h]
  ad::Parameter* bias = nullptr;      // [4h]

  static LstmCell create(ParameterStore& store, const std::string& name, std::size_t input,
                         std::size_t hidden);
  std::size_t hidden() const { return w_hidden->value.shape()[0]; }
  /// Final hidden state after consuming rows of `seq` in the given order.
  Var run(Graph& g, Var seq, bool reverse) const;
};

/// Character-level bidirectional LSTM producing [forward final ; backward final].
struct BiLstmEncoder {
  LstmCell forward;
  LstmCell backward;
  double dropout_rate = 0.1;

  static BiLstmEncoder create(ParameterStore& store, const std::string& name, std::size_t input,
                              std::size_t hidden, double dropout_rate);
  std::size_t output_size() const { return 2 * forward.hidden(); }
  /// seq is [n x d] with n >= 1; throws ContractError on an empty sequence.
  Var encode(Graph& g, Var seq, Mode mode, Rng& rng) const;
};

/// GRU with reset gate applied to the hidden projection (r * (W_hn h + b_hn)).
struct GruCell {
  ad::Parameter* w_input = nullptr;   // [d x 3h], layout [reset | update | candidate]
  ad::Parameter* w_hidden = nullptr;  // [h x 3h]
  ad::Parameter* b_input = nullptr;   // [3h]
  ad::Parameter* b_hidden = nullptr;  // [3h]

  static GruCell create(ParameterStore& store, const std::string& name, std::size_t input,
                        std::size_t hidden);
  std::size_t hidden() const { return w_hidden->value.shape()[0]; }
  std::size_t input() const { return w_input->value.shape()[0]; }
  /// One update; hidden is [h], input is [d].
  Var step(Graph& g, Var hidden, Var input) const;
};

enum class Activation { relu, tanh };

/// Three affine maps; dropout sits between the first and second.
struct MlpHead {
  Linear first;
  Linear second;
  Linear third;
  double dropout_rate = 0.1;
  Activation activation = Activation::relu;

  static MlpHead create(ParameterStore& store, const std::string& name, std::size_t in,
                        std::size_t hidden1, std::size_t hidden2, std::size_t out,
                        double dropout_rate, Activation activation = Activation::relu);
  std::size_t in() const { return first.in(); }
  /// Rows of x are independent examples; output is [rows x out] (or [out]).
  Var operator()(Graph& g, Var x, Mode mode, Rng& rng) const;
};

enum class Pooling { first_token, mean };

struct EncoderConfig {
  std::size_t vocab = 0;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t feed_forward = 128;
  std::size_t max_len = 128;
  double dropout_rate = 0.1;
  Pooling pooling = Pooling::first_token;
};

struct EncoderOutput {
  Var hidden;  // [n x d_model]
  Var pooled;  // [d_model]
  /// Per block, per head attention matrices [n x n] (kept for inspection).
  std::vector<Var> attention;
};

/// Post-norm transformer encoder: token embeddings scaled by sqrt(d_model)
/// plus sinusoidal positions, then blocks of masked multi-head
/// self-attention and a ReLU feed-forward, each wrapped in residual + layer
/// norm. The pooled output is tanh of an affine map of the first position
/// (or of the masked mean).
class TransformerEncoder {
 public:
  static TransformerEncoder create(ParameterStore& store, const std::string& name,
                                   const EncoderConfig& config);

  const EncoderConfig& config() const noexcept { return config_; }
  const Embedding& embedding() const noexcept { return embedding_; }

  /// `mask[i]` is false on padding positions. Throws ContractError when the
  /// sequence exceeds max_len or holds no real position.
  EncoderOutput encode(Graph& g, std::span<const int> ids, const std::vector<bool>& mask,
                       Mode mode, Rng& rng) const;

  static ad::Tensor positional_encoding(std::size_t length, std::size_t d_model);

 private:
  struct Block {
    Linear qkv;
    Linear out;
    ad::Parameter* norm1_gain = nullptr;
    ad::Parameter* norm1_offset = nullptr;
    Linear ff1;
    Linear ff2;
    ad::Parameter* norm2_gain = nullptr;
    ad::Parameter* norm2_offset = nullptr;
  };

  Var attend(Graph& g, const Block& block, Var x, const std::vector<bool>& mask,
             std::vector<Var>& attention) const;

  EncoderConfig config_;
  Embedding embedding_;
  std::vector<Block> blocks_;
  Linear pooler_;
};

}  // namespace lexda::nn
