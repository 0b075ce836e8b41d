#include "selftalk/lipreader.hpp"

#include "selftalk/errors.hpp"

namespace selftalk {

void LipReaderConfig::validate() const {
  if (lip_region.empty()) throw InvalidArgument("lip reader config: empty region name");
  if (latent_dim == 0 || heads == 0 || latent_dim % heads != 0)
    throw InvalidArgument("lip reader config: latent_dim must be a positive multiple of heads");
  if (encoder_layers < 1) throw InvalidArgument("lip reader config: needs encoder layers");
  if (ffn_dim == 0) throw InvalidArgument("lip reader config: ffn_dim must be positive");
  if (vocab_size < 2) throw InvalidArgument("lip reader config: vocabulary too small");
}

Mat select_lip_offsets(const VertexSequence& offsets, const FaceMesh& mesh,
                       const std::string& region) {
  if (offsets.vertex_count() != mesh.vertex_count())
    throw MismatchError("select_lip_offsets: sequence does not match the mesh");
  const auto cols = mesh.region_columns(region);
  Mat out(offsets.frames(), cols.size());
  for (std::size_t t = 0; t < offsets.frames(); ++t)
    for (std::size_t j = 0; j < cols.size(); ++j) out.at(t, j) = offsets.offsets.at(t, cols[j]);
  return out;
}

LipReadingInterpreter::LipReadingInterpreter(const LipReaderConfig& cfg,
                                             std::size_t lip_vertex_count, std::uint64_t seed)
    : cfg_(cfg), lip_dims_(3 * lip_vertex_count) {
  cfg_.validate();
  if (lip_vertex_count == 0) throw InvalidArgument("lip reader: empty lip region");
  Rng rng(seed);
  embed_ = Linear(lip_dims_, cfg_.latent_dim, rng);
  Mat ones(1, cfg_.latent_dim);
  for (double& x : ones.v) x = 1.0;
  embed_norm_gain_ = Tensor::parameter(ones);
  embed_norm_bias_ = Tensor::parameter(Mat(1, cfg_.latent_dim));
  blocks_.reserve(cfg_.encoder_layers);
  for (std::size_t i = 0; i < cfg_.encoder_layers; ++i)
    blocks_.emplace_back(cfg_.latent_dim, cfg_.heads, cfg_.ffn_dim, false, rng);
  text_decoder_ = Linear(cfg_.latent_dim, cfg_.latent_dim, rng);
  ctc_proj_ = Linear(cfg_.latent_dim, cfg_.vocab_size, rng);
}

Tensor LipReadingInterpreter::select_lips(const Tensor& offsets, const FaceMesh& mesh) const {
  if (offsets.cols() != 3 * mesh.vertex_count())
    throw MismatchError("select_lips: offsets do not match the mesh");
  const auto cols = mesh.region_columns(cfg_.lip_region);
  if (cols.size() != lip_dims_)
    throw MismatchError("select_lips: region size does not match the model");
  return gather_cols(offsets, cols);
}

Tensor LipReadingInterpreter::encode(const Tensor& lips) const {
  if (lips.cols() != lip_dims_) throw MismatchError("lip reader: unexpected lip width");
  Tensor x = embed_.apply(lips);
  x = layer_norm_rows(x, embed_norm_gain_, embed_norm_bias_, 1e-8);
  x = add(x, Tensor::constant(sinusoidal_positions(x.rows(), x.cols())));
  for (const auto& block : blocks_) x = block.apply(x);
  return x;
}

Tensor LipReadingInterpreter::decode_probs(const Tensor& latents) const {
  Tensor e = relu(text_decoder_.apply(latents));
  return softmax_rows(ctc_proj_.apply(e));
}

LipReadingInterpreter::Reading LipReadingInterpreter::lipread(const VertexSequence& offsets,
                                                              const FaceMesh& mesh,
                                                              const Vocabulary& vocab) const {
  if (vocab.size() != cfg_.vocab_size)
    throw MismatchError("lip reader: vocabulary size does not match the model");
  Tensor offset_rows = Tensor::constant(offsets.offsets);
  Tensor latents = encode(select_lips(offset_rows, mesh));
  Tensor probs = decode_probs(latents);

  Reading out;
  out.latents.values = latents.to_mat();
  out.latents.fps = offsets.fps;
  out.dist.probs = probs.to_mat();
  out.dist.fps = offsets.fps;
  out.transcript = greedy_ctc_decode(out.dist, vocab);
  return out;
}

NamedParams LipReadingInterpreter::parameters() const {
  NamedParams params;
  embed_.collect("lipreader.embed", params);
  params.push_back({"lipreader.embed_norm.gain", embed_norm_gain_});
  params.push_back({"lipreader.embed_norm.bias", embed_norm_bias_});
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i].collect("lipreader.encoder.layer" + std::to_string(i), params);
  text_decoder_.collect("lipreader.text_decoder", params);
  ctc_proj_.collect("lipreader.ctc_proj", params);
  return params;
}

}  // namespace selftalk
