#include "selftalk/animator.hpp"

#include <cmath>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {
// wav2vec-style geometry scaled down: 25 ms receptive field, 20 ms hop.
constexpr std::size_t kFrontendChannels = 32;
constexpr std::size_t kFrontendKernel = 400;
constexpr std::size_t kFrontendStride = 320;
constexpr std::size_t kRefineKernel = 3;
}  // namespace

void AnimatorConfig::validate() const {
  if (feature_dim == 0 || heads == 0 || feature_dim % heads != 0)
    throw InvalidArgument("animator config: feature_dim must be a positive multiple of heads");
  if (decoder_layers < 1) throw InvalidArgument("animator config: needs at least one decoder layer");
  if (ffn_dim == 0) throw InvalidArgument("animator config: ffn_dim must be positive");
  if (!(fps > 0.0)) throw InvalidArgument("animator config: fps must be positive");
  if (vertex_count == 0) throw InvalidArgument("animator config: vertex_count must be positive");
  if (encoder_kind == EncoderKind::ExternalAdapter && external_feature_dim == 0)
    throw InvalidArgument("animator config: external_feature_dim must be positive");
  if (!(output_scale > 0.0))
    throw InvalidArgument("animator config: output_scale must be positive");
}

FacialAnimator::FacialAnimator(const AnimatorConfig& cfg, std::uint64_t seed,
                               std::shared_ptr<const AudioFeatureProvider> provider)
    : cfg_(cfg), provider_(std::move(provider)) {
  cfg_.validate();
  if (cfg_.encoder_kind == EncoderKind::ExternalAdapter && !provider_)
    throw InvalidArgument("animator: external encoder kind needs a feature provider");

  Rng rng(seed);
  if (cfg_.encoder_kind == EncoderKind::MockConv) {
    conv1_ = Conv1dLayer(1, kFrontendChannels, kFrontendKernel, kFrontendStride, rng);
    conv2_ = Conv1dLayer(kFrontendChannels, cfg_.feature_dim, kRefineKernel, 1, rng);
    encoder_block_ = TransformerBlock(cfg_.feature_dim, cfg_.heads, cfg_.ffn_dim, true, rng);
    if (cfg_.freeze_feature_frontend) {
      NamedParams frontend;
      conv1_.collect("frontend.conv1", frontend);
      conv2_.collect("frontend.conv2", frontend);
      freeze(frontend);
    }
  } else {
    adapter_proj_ = Linear(cfg_.external_feature_dim, cfg_.feature_dim, rng);
    encoder_block_ = TransformerBlock(cfg_.feature_dim, cfg_.heads, cfg_.ffn_dim, true, rng);
  }
  decoder_blocks_.reserve(cfg_.decoder_layers);
  for (std::size_t i = 0; i < cfg_.decoder_layers; ++i)
    decoder_blocks_.emplace_back(cfg_.feature_dim, cfg_.heads, cfg_.ffn_dim, true, rng);
  out_proj_ = Linear(cfg_.feature_dim, 3 * cfg_.vertex_count, rng, 0.1);
}

Tensor FacialAnimator::encode(const AudioClip& audio) const {
  const auto target_frames = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(audio.duration_seconds() * cfg_.fps)));

  Tensor features;
  if (cfg_.encoder_kind == EncoderKind::MockConv) {
    const std::size_t min_samples = kFrontendKernel + (kRefineKernel - 1) * kFrontendStride;
    if (audio.samples.size() < min_samples)
      throw InvalidArgument("animator: audio shorter than one feature frame");
    Tensor waveform = Tensor::constant(Mat(audio.samples.size(), 1, audio.samples));
    Tensor x = relu(conv1_.apply(waveform));
    x = relu(conv2_.apply(x));
    x = add(x, Tensor::constant(sinusoidal_positions(x.rows(), x.cols())));
    features = encoder_block_.apply(x);
  } else {
    FeatureSequence external = provider_->audio_features(audio);
    if (external.dim() != cfg_.external_feature_dim)
      throw MismatchError("animator: provider feature width does not match the config");
    Tensor x = adapter_proj_.apply(Tensor::constant(external.values));
    x = add(x, Tensor::constant(sinusoidal_positions(x.rows(), x.cols())));
    features = encoder_block_.apply(x);
  }
  return resample_rows(features, target_frames);
}

Tensor FacialAnimator::decode(const Tensor& features) const {
  if (features.cols() != cfg_.feature_dim)
    throw MismatchError("animator: feature width does not match the decoder");
  Tensor x = add(features, Tensor::constant(sinusoidal_positions(features.rows(), features.cols())));
  for (const auto& block : decoder_blocks_) x = block.apply(x);
  return scale(out_proj_.apply(x), cfg_.output_scale);
}

FeatureSequence FacialAnimator::encode_audio(const AudioClip& audio) const {
  FeatureSequence out;
  out.values = encode(audio).to_mat();
  out.fps = cfg_.fps;
  return out;
}

VertexSequence FacialAnimator::animate(const AudioClip& audio) const {
  VertexSequence out;
  out.offsets = animate_graph(audio).to_mat();
  out.fps = cfg_.fps;
  return out;
}

NamedParams FacialAnimator::parameters() const {
  NamedParams params;
  if (cfg_.encoder_kind == EncoderKind::MockConv) {
    conv1_.collect("animator.frontend.conv1", params);
    conv2_.collect("animator.frontend.conv2", params);
  } else {
    adapter_proj_.collect("animator.adapter_proj", params);
  }
  encoder_block_.collect("animator.encoder.block0", params);
  for (std::size_t i = 0; i < decoder_blocks_.size(); ++i)
    decoder_blocks_[i].collect("animator.decoder.layer" + std::to_string(i), params);
  out_proj_.collect("animator.decoder.out_proj", params);
  return params;
}

}  // namespace selftalk
