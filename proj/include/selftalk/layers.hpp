// layers.hpp — trainable building blocks: affine layers, 1-D convolutions,
// transformer blocks with optional causal masking, sinusoidal positions.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "selftalk/rng.hpp"
#include "selftalk/tensor.hpp"

namespace selftalk {

struct NamedParam {
  std::string name;
  Tensor tensor;
};
using NamedParams = std::vector<NamedParam>;

struct Linear {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, double weight_scale = 1.0);
  Tensor apply(const Tensor& x) const { return add_rowvec(matmul(x, weight), bias); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct Conv1dLayer {
  Tensor weight;  // out x (in*kernel)
  Tensor bias;    // 1 x out
  std::size_t kernel = 1;
  std::size_t stride = 1;

  Conv1dLayer() = default;
  Conv1dLayer(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, Rng& rng);
  Tensor apply(const Tensor& x) const { return conv1d(x, weight, bias, kernel, stride); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

// softmax(q k^T / sqrt(dk) [+ causal mask]) v
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, bool causal);

// Pre-norm transformer block: x + MHA(LN(x)), then + FFN(LN(.)).
struct TransformerBlock {
  std::size_t heads = 1;
  bool causal = false;
  Linear wq, wk, wv, wo;
  Linear ffn1, ffn2;
  Tensor norm1_gain, norm1_bias, norm2_gain, norm2_bias;

  TransformerBlock() = default;
  TransformerBlock(std::size_t dim, std::size_t heads, std::size_t ffn_dim, bool causal, Rng& rng);
  Tensor apply(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Standard sin/cos position table, rows x dim.
Mat sinusoidal_positions(std::size_t rows, std::size_t dim);

// Marks every tensor as frozen (no gradients, skipped by the optimizer).
void freeze(NamedParams& params);

// FNV-1a over the raw little-endian bytes of every value, in order.
std::uint64_t parameter_fingerprint(const NamedParams& params);

}  // namespace selftalk
