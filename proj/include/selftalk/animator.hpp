// animator.hpp — audio -> per-frame vertex offsets: a trainable convolutional
// frontend plus causal transformer encoder feed a causal transformer mesh
// decoder ending in a linear projection to 3V offsets.
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "selftalk/audio.hpp"
#include "selftalk/features.hpp"
#include "selftalk/layers.hpp"
#include "selftalk/mesh.hpp"

namespace selftalk {

enum class EncoderKind { MockConv, ExternalAdapter };

struct AnimatorConfig {
  std::size_t feature_dim = 64;  // F1, divisible by heads
  std::size_t decoder_layers = 4;
  std::size_t heads = 4;
  std::size_t ffn_dim = 256;
  double fps = 25.0;
  std::size_t vertex_count = 50;
  bool freeze_feature_frontend = false;
  EncoderKind encoder_kind = EncoderKind::MockConv;
  std::size_t external_feature_dim = 1024;  // adapter route only
  // Offsets are predicted in normalized units and scaled by this constant so
  // the projection weights stay O(1) for the optimizer.
  double output_scale = 1e-3;

  void validate() const;
};

// External feature source used when encoder_kind == ExternalAdapter.
class AudioFeatureProvider {
 public:
  virtual ~AudioFeatureProvider() = default;
  virtual FeatureSequence audio_features(const AudioClip& audio) const = 0;
};

class FacialAnimator {
 public:
  FacialAnimator(const AnimatorConfig& cfg, std::uint64_t seed,
                 std::shared_ptr<const AudioFeatureProvider> provider = nullptr);

  const AnimatorConfig& config() const { return cfg_; }

  // Graph-building paths (training and inference share them).
  Tensor encode(const AudioClip& audio) const;    // T x F1 rows at cfg.fps
  Tensor decode(const Tensor& features) const;    // T x 3V offsets
  Tensor animate_graph(const AudioClip& audio) const { return decode(encode(audio)); }

  // Value-level contract surfaces.
  FeatureSequence encode_audio(const AudioClip& audio) const;
  VertexSequence animate(const AudioClip& audio) const;

  NamedParams parameters() const;

 private:
  AnimatorConfig cfg_;
  std::shared_ptr<const AudioFeatureProvider> provider_;
  // mock-conv encoder
  Conv1dLayer conv1_, conv2_;
  TransformerBlock encoder_block_;
  // adapter encoder
  Linear adapter_proj_;
  // mesh decoder
  std::vector<TransformerBlock> decoder_blocks_;
  Linear out_proj_;
};

}  // namespace selftalk
