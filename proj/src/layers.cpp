#include "selftalk/layers.hpp"

#include <cmath>
#include <cstring>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

Mat normal_mat(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Mat m(rows, cols);
  for (double& x : m.v) x = rng.normal(0.0, scale);
  return m;
}

Mat ones_row(std::size_t cols) {
  Mat m(1, cols);
  for (double& x : m.v) x = 1.0;
  return m;
}

}  // namespace

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, double weight_scale)
    : weight(Tensor::parameter(normal_mat(rng, in, out, weight_scale / std::sqrt(static_cast<double>(in))))),
      bias(Tensor::parameter(Mat(1, out))) {}

void Linear::collect(const std::string& prefix, NamedParams& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Conv1dLayer::Conv1dLayer(std::size_t in, std::size_t out, std::size_t kernel_, std::size_t stride_,
                         Rng& rng)
    : weight(Tensor::parameter(
          normal_mat(rng, out, in * kernel_, 1.0 / std::sqrt(static_cast<double>(in * kernel_))))),
      bias(Tensor::parameter(Mat(1, out))),
      kernel(kernel_),
      stride(stride_) {}

void Conv1dLayer::collect(const std::string& prefix, NamedParams& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, bool causal) {
  if (q.cols() != k.cols() || k.rows() != v.rows())
    throw MismatchError("scaled_dot_attention: inconsistent shapes");
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Tensor scores = scale(matmul(q, transpose(k)), inv_sqrt_dk);
  if (causal) {
    // -1e30 underflows to an exactly zero attention weight after softmax.
    Mat mask(q.rows(), k.rows());
    for (std::size_t r = 0; r < mask.rows; ++r)
      for (std::size_t c = r + 1; c < mask.cols; ++c) mask.at(r, c) = -1e30;
    scores = add(scores, Tensor::constant(mask));
  }
  return matmul(softmax_rows(scores), v);
}

TransformerBlock::TransformerBlock(std::size_t dim, std::size_t heads_, std::size_t ffn_dim,
                                   bool causal_, Rng& rng)
    : heads(heads_),
      causal(causal_),
      wq(dim, dim, rng),
      wk(dim, dim, rng),
      wv(dim, dim, rng),
      wo(dim, dim, rng),
      ffn1(dim, ffn_dim, rng),
      ffn2(ffn_dim, dim, rng),
      norm1_gain(Tensor::parameter(ones_row(dim))),
      norm1_bias(Tensor::parameter(Mat(1, dim))),
      norm2_gain(Tensor::parameter(ones_row(dim))),
      norm2_bias(Tensor::parameter(Mat(1, dim))) {
  if (dim % heads_ != 0) throw InvalidArgument("transformer block: dim must divide by heads");
}

Tensor TransformerBlock::apply(const Tensor& x) const {
  const std::size_t dim = x.cols();
  const std::size_t head_dim = dim / heads;

  Tensor normed = layer_norm_rows(x, norm1_gain, norm1_bias);
  Tensor q = wq.apply(normed);
  Tensor k = wk.apply(normed);
  Tensor v = wv.apply(normed);
  std::vector<Tensor> head_outputs;
  head_outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t first = h * head_dim;
    head_outputs.push_back(scaled_dot_attention(slice_cols(q, first, head_dim),
                                                slice_cols(k, first, head_dim),
                                                slice_cols(v, first, head_dim), causal));
  }
  Tensor attended = add(x, wo.apply(concat_cols(head_outputs)));

  Tensor normed2 = layer_norm_rows(attended, norm2_gain, norm2_bias);
  Tensor ffn = ffn2.apply(relu(ffn1.apply(normed2)));
  return add(attended, ffn);
}

void TransformerBlock::collect(const std::string& prefix, NamedParams& out) const {
  wq.collect(prefix + ".wq", out);
  wk.collect(prefix + ".wk", out);
  wv.collect(prefix + ".wv", out);
  wo.collect(prefix + ".wo", out);
  ffn1.collect(prefix + ".ffn1", out);
  ffn2.collect(prefix + ".ffn2", out);
  out.push_back({prefix + ".norm1.gain", norm1_gain});
  out.push_back({prefix + ".norm1.bias", norm1_bias});
  out.push_back({prefix + ".norm2.gain", norm2_gain});
  out.push_back({prefix + ".norm2.bias", norm2_bias});
}

Mat sinusoidal_positions(std::size_t rows, std::size_t dim) {
  Mat pe(rows, dim);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const double rate = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(dim));
      pe.at(t, i) = std::sin(static_cast<double>(t) * rate);
      if (i + 1 < dim) pe.at(t, i + 1) = std::cos(static_cast<double>(t) * rate);
    }
  }
  return pe;
}

void freeze(NamedParams& params) {
  for (auto& p : params) p.tensor.set_requires_grad(false);
}

std::uint64_t parameter_fingerprint(const NamedParams& params) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    for (double v : p.tensor.values()) mix(&v, sizeof(v));
  }
  return h;
}

}  // namespace selftalk
