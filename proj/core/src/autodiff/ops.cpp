#include "lexda/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lexda/error.hpp"

namespace lexda::ad {

namespace {

Graph& owner(Var v) {
  if (!v.valid()) throw ContractError("operation on an unbound Var");
  return *v.graph();
}

Graph& common_owner(Var a, Var b) {
  Graph& g = owner(a);
  if (b.graph() != &g) throw ContractError("operands belong to different graphs");
  return g;
}

std::string two_shapes(const Tensor& a, const Tensor& b) {
  return shape_string(a.shape()) + " and " + shape_string(b.shape());
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C[m x k] += G[m x n] * B[k x n]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// C[k x n] += A[m x k]^T * G[m x n]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * gi[j];
    }
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + two_shapes(a, b));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = common_owner(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() > 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    throw DimensionError("matmul: cannot multiply " + two_shapes(av, bv));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out(av.rank() == 1 ? Shape{n} : Shape{m, n});
  gemm_nn(av.data(), bv.data(), out.data(), m, k, n);
  const auto ia = a.id(), ib = b.id();
  return g.record("matmul", std::move(out), {ia, ib},
                  [ia, ib, m, k, n](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    if (gi[0]) gemm_nt(go.data(), gr.value_at(ib).data(), gi[0]->data(), m, n, k);
                    if (gi[1]) gemm_tn(gr.value_at(ia).data(), go.data(), gi[1]->data(), m, k, n);
                  });
}

Var transpose(Var x) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw DimensionError("transpose needs a matrix, got " + shape_string(xv.shape()));
  const std::size_t r = xv.rows(), c = xv.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = xv.at(i, j);
  return g.record("transpose", std::move(out), {x.id()},
                  [r, c](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < c; ++j) gi[0]->at(i, j) += go.at(j, i);
                  });
}

Var elementwise(Unary op, Var x) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  const std::size_t n = xv.size();
  const double* in = xv.data();
  double* o = out.data();
  const char* name = "";
  switch (op) {
    case Unary::sigmoid:
      name = "sigmoid";
      for (std::size_t i = 0; i < n; ++i) {
        o[i] = in[i] >= 0 ? 1.0 / (1.0 + std::exp(-in[i]))
                          : std::exp(in[i]) / (1.0 + std::exp(in[i]));
      }
      break;
    case Unary::tanh:
      name = "tanh";
      for (std::size_t i = 0; i < n; ++i) o[i] = std::tanh(in[i]);
      break;
    case Unary::relu:
      name = "relu";
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i] > 0 ? in[i] : 0.0;
      break;
    case Unary::exp:
      name = "exp";
      for (std::size_t i = 0; i < n; ++i) o[i] = std::exp(in[i]);
      break;
    case Unary::log:
      name = "log";
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in[i] > 0.0)) {
          throw DomainError("log of non-positive value " + std::to_string(in[i]) + " at index " +
                            std::to_string(i));
        }
        o[i] = std::log(in[i]);
      }
      break;
    case Unary::square:
      name = "square";
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i] * in[i];
      break;
    case Unary::abs:
      name = "abs";
      for (std::size_t i = 0; i < n; ++i) o[i] = std::abs(in[i]);
      break;
  }
  const auto ix = x.id();
  const auto self = g.size();
  return g.record(name, std::move(out), {ix},
                  [op, ix, self, n](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const double* xin = gr.value_at(ix).data();
                    const double* y = gr.value_at(self).data();
                    const double* gv = go.data();
                    double* d = gi[0]->data();
                    switch (op) {
                      case Unary::sigmoid:
                        for (std::size_t i = 0; i < n; ++i) d[i] += gv[i] * y[i] * (1.0 - y[i]);
                        break;
                      case Unary::tanh:
                        for (std::size_t i = 0; i < n; ++i) d[i] += gv[i] * (1.0 - y[i] * y[i]);
                        break;
                      case Unary::relu:
                        for (std::size_t i = 0; i < n; ++i) d[i] += xin[i] > 0 ? gv[i] : 0.0;
                        break;
                      case Unary::exp:
                        for (std::size_t i = 0; i < n; ++i) d[i] += gv[i] * y[i];
                        break;
                      case Unary::log:
                        for (std::size_t i = 0; i < n; ++i) d[i] += gv[i] / xin[i];
                        break;
                      case Unary::square:
                        for (std::size_t i = 0; i < n; ++i) d[i] += 2.0 * xin[i] * gv[i];
                        break;
                      case Unary::abs:
                        for (std::size_t i = 0; i < n; ++i) {
                          d[i] += xin[i] > 0 ? gv[i] : (xin[i] < 0 ? -gv[i] : 0.0);
                        }
                        break;
                    }
                  });
}

Var elementwise(Binary op, Var a, Var b) {
  Graph& g = common_owner(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const char* name = op == Binary::add ? "add" : op == Binary::sub ? "sub" : "mul";
  require_same_shape(name, av, bv);
  Tensor out(av.shape());
  const std::size_t n = av.size();
  for (std::size_t i = 0; i < n; ++i) {
    switch (op) {
      case Binary::add: out[i] = av[i] + bv[i]; break;
      case Binary::sub: out[i] = av[i] - bv[i]; break;
      case Binary::mul: out[i] = av[i] * bv[i]; break;
    }
  }
  const auto ia = a.id(), ib = b.id();
  return g.record(name, std::move(out), {ia, ib},
                  [op, ia, ib, n](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    switch (op) {
                      case Binary::add:
                        if (gi[0]) *gi[0] += go;
                        if (gi[1]) *gi[1] += go;
                        break;
                      case Binary::sub:
                        if (gi[0]) *gi[0] += go;
                        if (gi[1])
                          for (std::size_t i = 0; i < n; ++i) (*gi[1])[i] -= go[i];
                        break;
                      case Binary::mul: {
                        const Tensor& A = gr.value_at(ia);
                        const Tensor& B = gr.value_at(ib);
                        if (gi[0])
                          for (std::size_t i = 0; i < n; ++i) (*gi[0])[i] += go[i] * B[i];
                        if (gi[1])
                          for (std::size_t i = 0; i < n; ++i) (*gi[1])[i] += go[i] * A[i];
                        break;
                      }
                    }
                  });
}

Var scale(Var x, double factor) {
  Graph& g = owner(x);
  Tensor out = x.value();
  out *= factor;
  return g.record("scale", std::move(out), {x.id()},
                  [factor](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < go.size(); ++i) (*gi[0])[i] += factor * go[i];
                  });
}

Var shift(Var x, double offset) {
  Graph& g = owner(x);
  Tensor out = x.value();
  for (double& v : out.values()) v += offset;
  return g.record("shift", std::move(out), {x.id()},
                  [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) { *gi[0] += go; });
}

Var add_bias(Var x, Var bias) {
  Graph& g = common_owner(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols()) {
    throw DimensionError("add_bias: bias " + shape_string(bv.shape()) + " does not fit rows of " +
                         shape_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t r = xv.rows(), c = xv.cols();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bv[j];
  return g.record("add_bias", std::move(out), {x.id(), bias.id()},
                  [r, c](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    if (gi[0]) *gi[0] += go;
                    if (gi[1])
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) (*gi[1])[j] += go[i * c + j];
                  });
}

Var sum(Var x) {
  Graph& g = owner(x);
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return g.record("sum", Tensor::scalar(total), {x.id()},
                  [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    const double gv = go[0];
                    for (double& d : gi[0]->values()) d += gv;
                  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.size());
  return scale(sum(x), 1.0 / n);
}

Var softmax(Var x, int axis) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  const int rank = static_cast<int>(xv.rank());
  const int ax = axis < 0 ? rank + axis : axis;
  if (ax < 0 || ax >= rank) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " +
                         shape_string(xv.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < ax; ++d) outer *= xv.shape()[d];
  for (int d = ax + 1; d < rank; ++d) inner *= xv.shape()[d];
  const std::size_t len = xv.shape()[ax];
  Tensor out(xv.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, xv[base + i * inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double e = std::exp(xv[base + i * inner] - mx);
        out[base + i * inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < len; ++i) out[base + i * inner] /= z;
    }
  }
  const auto self = g.size();
  return g.record("softmax", std::move(out), {x.id()},
                  [self, outer, inner, len](const Graph& gr, const Tensor& go,
                                            std::span<Tensor* const> gi) {
                    const Tensor& y = gr.value_at(self);
                    for (std::size_t o = 0; o < outer; ++o) {
                      for (std::size_t in = 0; in < inner; ++in) {
                        const std::size_t base = o * len * inner + in;
                        double dot = 0.0;
                        for (std::size_t i = 0; i < len; ++i) {
                          dot += go[base + i * inner] * y[base + i * inner];
                        }
                        for (std::size_t i = 0; i < len; ++i) {
                          const std::size_t at = base + i * inner;
                          (*gi[0])[at] += y[at] * (go[at] - dot);
                        }
                      }
                    }
                  });
}

Var masked_softmax(Var x, const std::vector<bool>& key_mask) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (key_mask.size() != c) {
    throw DimensionError("masked_softmax: mask of length " + std::to_string(key_mask.size()) +
                         " for rows of width " + std::to_string(c));
  }
  if (std::none_of(key_mask.begin(), key_mask.end(), [](bool b) { return b; })) {
    throw ContractError("masked_softmax: every column is masked");
  }
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (key_mask[j]) mx = std::max(mx, xv.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!key_mask[j]) continue;
      const double e = std::exp(xv.at(i, j) - mx);
      out.at(i, j) = e;
      z += e;
    }
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
  }
  const auto self = g.size();
  return g.record("masked_softmax", std::move(out), {x.id()},
                  [self, r, c](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& y = gr.value_at(self);
                    for (std::size_t i = 0; i < r; ++i) {
                      double dot = 0.0;
                      for (std::size_t j = 0; j < c; ++j) dot += go.at(i, j) * y.at(i, j);
                      for (std::size_t j = 0; j < c; ++j) gi[0]->at(i, j) += y.at(i, j) * (go.at(i, j) - dot);
                    }
                  });
}

Var log_softmax(Var x) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, xv.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(xv.at(i, j) - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = xv.at(i, j) - lz;
  }
  const auto self = g.size();
  return g.record("log_softmax", std::move(out), {x.id()},
                  [self, r, c](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& y = gr.value_at(self);
                    for (std::size_t i = 0; i < r; ++i) {
                      double gs = 0.0;
                      for (std::size_t j = 0; j < c; ++j) gs += go.at(i, j);
                      for (std::size_t j = 0; j < c; ++j) {
                        gi[0]->at(i, j) += go.at(i, j) - std::exp(y.at(i, j)) * gs;
                      }
                    }
                  });
}

Var layer_norm(Var x, Var gain, Var offset, double eps) {
  Graph& g = common_owner(x, gain);
  common_owner(x, offset);
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (gain.size() != c || offset.size() != c) {
    throw DimensionError("layer_norm: gain/offset must have " + std::to_string(c) + " entries");
  }
  const Tensor& gv = gain.value();
  const Tensor& bv = offset.value();
  Tensor out(xv.shape());
  // normalized activations and per-row inverse std, needed by the adjoint
  std::vector<double> xhat(r * c), inv_std(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += xv.at(i, j);
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xv.at(i, j) - mu) * (xv.at(i, j) - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (xv.at(i, j) - mu) * inv_std[i];
      out.at(i, j) = xhat[i * c + j] * gv[j] + bv[j];
    }
  }
  const auto ig = gain.id();
  return g.record(
      "layer_norm", std::move(out), {x.id(), gain.id(), offset.id()},
      [ig, r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
        const Tensor& gv = gr.value_at(ig);
        const double nc = static_cast<double>(c);
        for (std::size_t i = 0; i < r; ++i) {
          if (gi[1] || gi[2]) {
            for (std::size_t j = 0; j < c; ++j) {
              if (gi[1]) (*gi[1])[j] += go.at(i, j) * xhat[i * c + j];
              if (gi[2]) (*gi[2])[j] += go.at(i, j);
            }
          }
          if (!gi[0]) continue;
          double s1 = 0.0, s2 = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double dxh = go.at(i, j) * gv[j];
            s1 += dxh;
            s2 += dxh * xhat[i * c + j];
          }
          for (std::size_t j = 0; j < c; ++j) {
            const double dxh = go.at(i, j) * gv[j];
            gi[0]->at(i, j) += inv_std[i] * (dxh - s1 / nc - xhat[i * c + j] * s2 / nc);
          }
        }
      });
}

Var pick(Var x, std::span<const std::size_t> indices) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (indices.size() != r) {
    throw DimensionError("pick: " + std::to_string(indices.size()) + " indices for " +
                         std::to_string(r) + " rows");
  }
  Tensor out({r});
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  for (std::size_t i = 0; i < r; ++i) {
    if (idx[i] >= c) {
      throw ContractError("pick: index " + std::to_string(idx[i]) + " out of range for width " +
                          std::to_string(c));
    }
    out[i] = xv.at(i, idx[i]);
  }
  return g.record("pick", std::move(out), {x.id()},
                  [idx = std::move(idx), c](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < idx.size(); ++i) (*gi[0])[i * c + idx[i]] += go[i];
                  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: nothing to concatenate");
  Graph& g = owner(parts[0]);
  const std::size_t r = parts[0].value().rows();
  const bool vector_out = parts[0].value().rank() == 1;
  std::vector<std::size_t> widths, ids;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.graph() != &g) throw ContractError("concat_cols: operands belong to different graphs");
    const Tensor& pv = p.value();
    if (pv.rows() != r || (pv.rank() == 1) != vector_out) {
      throw DimensionError("concat_cols: cannot join " + shape_string(parts[0].shape()) + " and " +
                           shape_string(pv.shape()));
    }
    widths.push_back(pv.cols());
    ids.push_back(p.id());
    total += pv.cols();
  }
  Tensor out(vector_out ? Shape{total} : Shape{r, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + offset + j] = pv[i * widths[k] + j];
    offset += widths[k];
  }
  return g.record("concat_cols", std::move(out), std::move(ids),
                  [widths, r, total](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < widths.size(); ++k) {
                      if (gi[k])
                        for (std::size_t i = 0; i < r; ++i)
                          for (std::size_t j = 0; j < widths[k]; ++j)
                            (*gi[k])[i * widths[k] + j] += go[i * total + off + j];
                      off += widths[k];
                    }
                  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: nothing to concatenate");
  Graph& g = owner(parts[0]);
  const std::size_t c = parts[0].value().cols();
  std::vector<std::size_t> sizes, ids;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.graph() != &g) throw ContractError("concat_rows: operands belong to different graphs");
    const Tensor& pv = p.value();
    if (pv.cols() != c || pv.rank() > 2) {
      throw DimensionError("concat_rows: cannot stack " + shape_string(parts[0].shape()) + " and " +
                           shape_string(pv.shape()));
    }
    sizes.push_back(pv.size());
    ids.push_back(p.id());
    rows += pv.rows();
  }
  std::vector<double> values;
  values.reserve(rows * c);
  for (const Var& p : parts) {
    const auto v = p.value().values();
    values.insert(values.end(), v.begin(), v.end());
  }
  return g.record("concat_rows", Tensor({rows, c}, std::move(values)), std::move(ids),
                  [sizes](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < sizes.size(); ++k) {
                      if (gi[k])
                        for (std::size_t j = 0; j < sizes[k]; ++j) (*gi[k])[j] += go[off + j];
                      off += sizes[k];
                    }
                  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (begin >= end || end > c) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + shape_string(xv.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out(xv.rank() == 1 ? Shape{w} : Shape{r, w});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = xv[i * c + begin + j];
  return g.record("slice_cols", std::move(out), {x.id()},
                  [r, c, w, begin](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < w; ++j) (*gi[0])[i * c + begin + j] += go[i * w + j];
                  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || begin >= end || end > xv.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + shape_string(xv.shape()));
  }
  const std::size_t c = xv.cols();
  std::vector<double> values(xv.data() + begin * c, xv.data() + end * c);
  return g.record("slice_rows", Tensor({end - begin, c}, std::move(values)), {x.id()},
                  [begin, c](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t k = 0; k < go.size(); ++k) (*gi[0])[begin * c + k] += go[k];
                  });
}

Var row(Var x, std::size_t i) {
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || i >= xv.rows()) {
    throw DimensionError("row " + std::to_string(i) + " invalid for " + shape_string(xv.shape()));
  }
  const std::size_t c = xv.cols();
  std::vector<double> values(xv.data() + i * c, xv.data() + (i + 1) * c);
  return g.record("row", Tensor::vector(std::move(values)), {x.id()},
                  [i, c](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t k = 0; k < c; ++k) (*gi[0])[i * c + k] += go[k];
                  });
}

Var reshape(Var x, Shape shape) {
  Graph& g = owner(x);
  Tensor out = x.value().reshaped(std::move(shape));
  return g.record("reshape", std::move(out), {x.id()},
                  [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t k = 0; k < go.size(); ++k) (*gi[0])[k] += go[k];
                  });
}

Var gather_rows(Var table, std::span<const int> indices) {
  Graph& g = owner(table);
  const Tensor& tv = table.value();
  if (tv.rank() != 2) throw DimensionError("gather_rows needs a matrix table");
  if (indices.empty()) throw ContractError("gather_rows: empty index list");
  const std::size_t vocab = tv.rows(), d = tv.cols();
  std::vector<int> idx(indices.begin(), indices.end());
  Tensor out({idx.size(), d});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= vocab) {
      throw VocabularyError("index " + std::to_string(idx[i]) + " outside table of " +
                            std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.data() + static_cast<std::size_t>(idx[i]) * d, d, out.data() + i * d);
  }
  return g.record("gather_rows", std::move(out), {table.id()},
                  [idx = std::move(idx), d](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      double* dst = gi[0]->data() + static_cast<std::size_t>(idx[i]) * d;
                      for (std::size_t j = 0; j < d; ++j) dst[j] += go[i * d + j];
                    }
                  });
}

Var grad_reverse(Var x, double scale) {
  if (!(scale >= 0.0)) {
    throw ConfigError("grad_reverse: scale must be non-negative, got " + std::to_string(scale));
  }
  Graph& g = owner(x);
  return g.record("grad_reverse", x.value(), {x.id()},
                  [scale](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t k = 0; k < go.size(); ++k) (*gi[0])[k] -= scale * go[k];
                  });
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::eval || rate == 0.0) return x;
  Graph& g = owner(x);
  const Tensor& xv = x.value();
  const double keep = 1.0 / (1.0 - rate);
  std::vector<double> mask(xv.size());
  Tensor out(xv.shape());
  for (std::size_t k = 0; k < mask.size(); ++k) {
    mask[k] = uniform01(rng) < rate ? 0.0 : keep;
    out[k] = xv[k] * mask[k];
  }
  return g.record("dropout", std::move(out), {x.id()},
                  [mask = std::move(mask)](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t k = 0; k < mask.size(); ++k) (*gi[0])[k] += go[k] * mask[k];
                  });
}

}  // namespace lexda::ad
