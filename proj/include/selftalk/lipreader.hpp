// lipreader.hpp — lip motion -> text distributions: lip-vertex selection,
// affine embedding, bidirectional transformer encoder, text decoder, CTC
// projection softmax.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selftalk/features.hpp"
#include "selftalk/layers.hpp"
#include "selftalk/mesh.hpp"
#include "selftalk/text.hpp"

namespace selftalk {

struct LipReaderConfig {
  std::string lip_region = "lips";
  std::size_t latent_dim = 64;  // F_lat, must equal the recognizer latent width
  std::size_t encoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t vocab_size = 7;

  void validate() const;
};

// Plain lip selection: row t concatenates offsets[t, v, :] in region order.
Mat select_lip_offsets(const VertexSequence& offsets, const FaceMesh& mesh,
                       const std::string& region = "lips");

class LipReadingInterpreter {
 public:
  LipReadingInterpreter(const LipReaderConfig& cfg, std::size_t lip_vertex_count,
                        std::uint64_t seed);

  const LipReaderConfig& config() const { return cfg_; }

  // Gathers lip columns; backward is a scatter, so non-lip gradients are
  // exactly zero at the offsets interface.
  Tensor select_lips(const Tensor& offsets, const FaceMesh& mesh) const;
  Tensor encode(const Tensor& lips) const;            // T x F_lat latents
  Tensor decode_probs(const Tensor& latents) const;   // T x U simplex rows

  struct Reading {
    LatentSequence latents;
    TextDistribution dist;
    Transcript transcript;
  };
  Reading lipread(const VertexSequence& offsets, const FaceMesh& mesh,
                  const Vocabulary& vocab) const;

  NamedParams parameters() const;

 private:
  LipReaderConfig cfg_;
  std::size_t lip_dims_;  // 3 * |lips|
  Linear embed_;
  // Offsets live at millimeter scale; the embedding is normalized before the
  // O(1) position encodings are added or they drown the signal.
  Tensor embed_norm_gain_, embed_norm_bias_;
  std::vector<TransformerBlock> blocks_;
  Linear text_decoder_;
  Linear ctc_proj_;
};

}  // namespace selftalk
