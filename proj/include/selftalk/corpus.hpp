// corpus.hpp — deterministic synthetic corpus: token strings rendered as pure
// tones (audio), canonical lip poses (mesh offsets), and transcripts, plus the
// on-disk corpus tree used by the CLI.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selftalk/audio.hpp"
#include "selftalk/mesh.hpp"
#include "selftalk/text.hpp"

namespace selftalk {

struct SynthConfig {
  std::size_t letters = 6;          // non-blank toy vocabulary size
  std::size_t vertex_count = 50;
  double fps = 25.0;
  std::size_t tokens_per_sample = 4;
  std::size_t sample_count = 8;
  double token_seconds = 0.2;
  double fade_seconds = 0.04;       // fade-in from neutral and token cross-fade
  double lip_amplitude = 1.5e-3;    // mesh units, lip-region vertices
  double face_amplitude = 1.5e-4;   // everywhere else
  double tone_base_hz = 400.0;
  double tone_step_hz = 200.0;
  double tone_gain = 0.5;

  void validate() const;
};

struct CorpusSample {
  std::string sample_id;
  AudioClip audio;
  VertexSequence gt_offsets;
  Transcript transcript;  // empty when ingested from unlabeled real data
};

struct Corpus {
  FaceMesh mesh;                 // template with "lips" and "upper_face" regions
  Vocabulary vocab;
  std::vector<double> tone_hz;   // by vocabulary index; 0 for the blank
  double fps = 0.0;
  double window_seconds = 0.0;   // tone window length
  Mat canonical_poses;           // letters x 3V (in-memory only)
  std::vector<CorpusSample> samples;
};

// Deterministic given (cfg, seed). Transcripts, tones and lip poses are
// mutually decodable by construction; pose injectivity is verified here.
Corpus generate_synthetic_corpus(const SynthConfig& cfg, std::uint64_t seed);

// Template mesh used by the generator (grid on a curved patch when the vertex
// count factors, triangle strip otherwise).
FaceMesh make_template_mesh(std::size_t vertex_count);

// WAV + MSEQ + transcript per sample, template/regions/vocabulary/manifest at
// the root. Byte-identical across runs with equal (cfg, seed).
void write_corpus(const Corpus& corpus, const SynthConfig& cfg, std::uint64_t seed,
                  const std::string& dir);

// Reads a tree produced by write_corpus (canonical_poses stays empty).
Corpus load_corpus(const std::string& dir);

}  // namespace selftalk
