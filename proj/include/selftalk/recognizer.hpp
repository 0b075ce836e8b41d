// recognizer.hpp — frozen audio -> (latents, text) oracle. The mock backend
// decodes the synthetic tone corpus exactly; the external adapter wraps any
// pretrained ASR behind a small HTTP protocol.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "selftalk/audio.hpp"
#include "selftalk/features.hpp"
#include "selftalk/text.hpp"

namespace selftalk {

struct RecognizerOutput {
  LatentSequence latents;   // T' x F_lat on the recognizer's native timeline
  TextDistribution logits;  // T' x U probability rows, same timeline
  Transcript transcript;
};

// Read-only after construction; recognize() never mutates state, so instances
// are safe to share across threads.
class SpeechRecognizer {
 public:
  virtual ~SpeechRecognizer() = default;
  virtual RecognizerOutput recognize(const AudioClip& audio) const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::size_t latent_dim() const = 0;
  // Fingerprint of every parameter byte; the frozen contract is checked by
  // comparing this before and after training.
  virtual std::uint64_t parameter_fingerprint() const = 0;
};

struct MockRecognizerConfig {
  Vocabulary vocab;
  std::vector<double> tone_hz;      // by vocabulary index, 0 for the blank
  double window_seconds = 0.2;
  std::size_t frames_per_window = 5;  // last frame of each window is a blank
  std::size_t latent_dim = 64;
  double epsilon = 1e-3;              // probability mass spread off the winner
  std::uint64_t embedding_seed = 0x5e1f;
};

// Per tone window: single-bin DFT power at each candidate tone frequency,
// argmax -> token; token embedding rows serve as latents. Silent windows emit
// the blank.
class MockRecognizer : public SpeechRecognizer {
 public:
  explicit MockRecognizer(MockRecognizerConfig cfg);
  RecognizerOutput recognize(const AudioClip& audio) const override;
  const Vocabulary& vocabulary() const override { return cfg_.vocab; }
  std::size_t latent_dim() const override { return cfg_.latent_dim; }
  std::uint64_t parameter_fingerprint() const override;
  const Mat& embeddings() const { return embeddings_; }

 private:
  MockRecognizerConfig cfg_;
  Mat embeddings_;  // U x latent_dim
};

// POSTs WAV bytes to <base_url>/recognize and expects
//   { "transcript": str,
//     "frames": [ { "probs": [U floats] }, ... ],
//     "latents": base64(f32 row-major T' x F2) }.
// Latents with F2 != latent_dim are mapped through a frozen seeded random
// projection.
class ExternalAsrAdapter : public SpeechRecognizer {
 public:
  ExternalAsrAdapter(std::string base_url, Vocabulary vocab, std::size_t latent_dim,
                     std::uint64_t projection_seed = 0xada9);
  RecognizerOutput recognize(const AudioClip& audio) const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t latent_dim() const override { return latent_dim_; }
  std::uint64_t parameter_fingerprint() const override;

 private:
  std::string base_url_;
  Vocabulary vocab_;
  std::size_t latent_dim_;
  std::uint64_t projection_seed_;
};

}  // namespace selftalk
