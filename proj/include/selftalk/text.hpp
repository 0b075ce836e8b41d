// text.hpp — vocabulary, per-frame symbol distributions, greedy CTC decoding
// and transcript comparison helpers.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "selftalk/mat.hpp"

namespace selftalk {

// Decoded symbol string; never contains the blank.
using Transcript = std::string;

struct Vocabulary {
  std::vector<std::string> symbols;
  std::size_t blank_index = 0;

  std::size_t size() const { return symbols.size(); }
  const std::string& blank() const { return symbols[blank_index]; }
  void validate() const;

  // Index of a single-character symbol; throws if unknown.
  std::size_t index_of(char c) const;
  // Transcript -> non-blank symbol ids (single-character symbols only).
  std::vector<std::size_t> encode(const Transcript& text) const;

  // blank '-' followed by `letters` lowercase letters starting at 'a'.
  static Vocabulary toy(std::size_t letters = 6);
};

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

// T x U rows of symbol probabilities on a frame timeline.
struct TextDistribution {
  Mat probs;
  double fps = 0.0;

  std::size_t frames() const { return probs.rows; }
  std::size_t symbols() const { return probs.cols; }
  void validate(double tol = 1e-6) const;
};

// Per-frame argmax, collapse consecutive repeats, drop blanks.
Transcript greedy_ctc_decode(const TextDistribution& dist, const Vocabulary& vocab);

std::size_t edit_distance(const std::string& a, const std::string& b);
// 1 - dist/max(|gt|, 1), clamped to [0, 1].
double char_accuracy(const std::string& reference, const std::string& hypothesis);

}  // namespace selftalk
