// audio.hpp — mono 16 kHz PCM clips and RIFF WAV ingestion.
#pragma once

#include <string>
#include <vector>

namespace selftalk {

struct AudioClip {
  static constexpr int kSampleRate = 16000;
  std::vector<double> samples;  // [-1, 1]

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / kSampleRate;
  }
};

// PCM16 mono or stereo at any rate; stereo is averaged, then the result is
// linearly resampled to 16 kHz and scaled by 1/32768.
AudioClip load_audio(const std::string& path);

// PCM16 mono 16 kHz.
void save_wav(const AudioClip& clip, const std::string& path);

// Same encoding as save_wav, kept in memory (adapter requests, tests).
std::string encode_wav(const AudioClip& clip);

}  // namespace selftalk
