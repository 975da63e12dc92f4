#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lexda/autodiff/graph.hpp"
#include "lexda/random.hpp"

// Differentiable operations. Every function records one node on the graph
// that owns its operands and registers the matching adjoint.
namespace lexda::ad {

// Linear algebra ------------------------------------------------------------

/// [m x k] . [k x n] -> [m x n]. A rank-1 left operand is a single row and
/// yields a rank-1 result.
Var matmul(Var a, Var b);
Var transpose(Var x);

// Elementwise ---------------------------------------------------------------

enum class Unary { sigmoid, tanh, relu, exp, log, square, abs };
enum class Binary { add, sub, mul };

Var elementwise(Unary op, Var x);
Var elementwise(Binary op, Var a, Var b);

inline Var sigmoid(Var x) { return elementwise(Unary::sigmoid, x); }
inline Var tanh(Var x) { return elementwise(Unary::tanh, x); }
inline Var relu(Var x) { return elementwise(Unary::relu, x); }
inline Var exp(Var x) { return elementwise(Unary::exp, x); }
/// Throws DomainError on non-positive input.
inline Var log(Var x) { return elementwise(Unary::log, x); }
inline Var square(Var x) { return elementwise(Unary::square, x); }
/// Subgradient 0 at the origin.
inline Var abs(Var x) { return elementwise(Unary::abs, x); }

inline Var operator+(Var a, Var b) { return elementwise(Binary::add, a, b); }
inline Var operator-(Var a, Var b) { return elementwise(Binary::sub, a, b); }
inline Var operator*(Var a, Var b) { return elementwise(Binary::mul, a, b); }

Var scale(Var x, double factor);
inline Var operator*(double factor, Var x) { return scale(x, factor); }
/// x + c for a constant c.
Var shift(Var x, double offset);
/// Adds a length-n bias to every row of an [m x n] (or rank-1 [n]) tensor.
Var add_bias(Var x, Var bias);

// Reductions ----------------------------------------------------------------

Var sum(Var x);
Var mean(Var x);

// Normalization -------------------------------------------------------------

/// Softmax along `axis` (negative counts from the end); max-subtracted.
Var softmax(Var x, int axis = -1);
/// Row softmax where columns with key_mask[c] == false get probability
/// exactly 0. Each row needs at least one unmasked column.
Var masked_softmax(Var x, const std::vector<bool>& key_mask);
/// Row-wise log-softmax.
Var log_softmax(Var x);
/// Row-wise layer normalization with learned gain and offset.
Var layer_norm(Var x, Var gain, Var offset, double eps = 1e-5);

// Structure -----------------------------------------------------------------

/// x[i, indices[i]] for each row; rank-1 x takes a single index.
Var pick(Var x, std::span<const std::size_t> indices);
/// Concatenation along the last axis. Rank-1 inputs give a rank-1 result.
Var concat_cols(std::span<const Var> parts);
/// Stacks rows; rank-1 inputs become the rows of a matrix.
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
/// Row i of a matrix as a rank-1 tensor.
Var row(Var x, std::size_t i);
Var reshape(Var x, Shape shape);
/// Embedding lookup: rows of `table` selected by `indices`.
/// Throws VocabularyError on an out-of-range index.
Var gather_rows(Var table, std::span<const int> indices);

// Training-time -------------------------------------------------------------

/// Identity forward; backward multiplies the incoming gradient by -scale.
/// Throws ConfigError for negative scale.
Var grad_reverse(Var x, double scale);

enum class Mode { train, eval };

/// Inverted dropout. Eval mode or rate 0 returns x itself.
/// Throws ConfigError unless 0 <= rate < 1.
Var dropout(Var x, double rate, Mode mode, Rng& rng);

}  // namespace lexda::ad
