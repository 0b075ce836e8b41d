#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "helpers/test_util.hpp"
#include "selftalk/audio.hpp"
#include "selftalk/errors.hpp"

using namespace selftalk;
namespace fs = std::filesystem;

namespace {

fs::path temp_wav(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("selftalk_audio_" + name + ".wav");
  fs::remove(p);
  return p;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

// Hand-rolled writer so load_audio is tested against independently built
// bytes (any rate, any channel count, any format tag).
void write_wav_raw(const fs::path& path, std::uint16_t format, std::uint16_t channels,
                   std::uint32_t rate, std::uint16_t bits,
                   const std::vector<std::int16_t>& interleaved) {
  std::string s;
  const std::uint32_t data_len = static_cast<std::uint32_t>(interleaved.size() * 2);
  s += "RIFF";
  put_u32(s, 36 + data_len);
  s += "WAVE";
  s += "fmt ";
  put_u32(s, 16);
  put_u16(s, format);
  put_u16(s, channels);
  put_u32(s, rate);
  put_u32(s, rate * channels * bits / 8);
  put_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(s, bits);
  s += "data";
  put_u32(s, data_len);
  for (std::int16_t x : interleaved) put_u16(s, static_cast<std::uint16_t>(x));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << s;
}

}  // namespace

TEST_CASE("load_audio: one second of 16 kHz mono silence") {
  auto p = temp_wav("silence");
  write_wav_raw(p, 1, 1, 16000, 16, std::vector<std::int16_t>(16000, 0));
  AudioClip clip = load_audio(p.string());
  REQUIRE(clip.samples.size() == 16000);
  for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("load_audio: 32 kHz sine halves in length and keeps its pitch") {
  auto p = temp_wav("sine32k");
  const double hz = 440.0;
  const std::size_t n = 32000;  // 1 s at 32 kHz
  std::vector<std::int16_t> pcm(n);
  for (std::size_t i = 0; i < n; ++i)
    pcm[i] = static_cast<std::int16_t>(
        std::llround(12000.0 * std::sin(2.0 * 3.14159265358979323846 * hz * i / 32000.0)));
  write_wav_raw(p, 1, 1, 32000, 16, pcm);
  AudioClip clip = load_audio(p.string());
  CHECK(clip.samples.size() >= n / 2 - 1);
  CHECK(clip.samples.size() <= n / 2 + 1);
  // Independent full-scan DFT oracle; 1 s of audio gives 1 Hz bins.
  const double peak = testutil::dft_peak_hz(clip.samples, AudioClip::kSampleRate);
  CHECK(std::fabs(peak - hz) <= 1.0);
}

TEST_CASE("load_audio: stereo with identical channels equals the mono signal") {
  auto mono_p = temp_wav("mono");
  auto stereo_p = temp_wav("stereo");
  std::vector<std::int16_t> mono(800);
  for (std::size_t i = 0; i < mono.size(); ++i)
    mono[i] = static_cast<std::int16_t>((i * 37) % 4001 - 2000);
  std::vector<std::int16_t> stereo;
  for (std::int16_t s : mono) {
    stereo.push_back(s);
    stereo.push_back(s);
  }
  write_wav_raw(mono_p, 1, 1, 16000, 16, mono);
  write_wav_raw(stereo_p, 1, 2, 16000, 16, stereo);
  AudioClip a = load_audio(mono_p.string());
  AudioClip b = load_audio(stereo_p.string());
  CHECK(a.samples == b.samples);
}

TEST_CASE("load_audio: rejects non-PCM16 and empty files") {
  auto p = temp_wav("float32");
  write_wav_raw(p, 3, 1, 16000, 16, std::vector<std::int16_t>(100, 0));
  CHECK_THROWS_WITH_AS(load_audio(p.string()), doctest::Contains("unsupported codec"),
                       FormatError);
  auto q = temp_wav("empty");
  write_wav_raw(q, 1, 1, 16000, 16, {});
  CHECK_THROWS_WITH_AS(load_audio(q.string()), doctest::Contains("empty"), FormatError);
  auto r = temp_wav("notriff");
  std::ofstream out(r, std::ios::binary);
  out << "this is not a wav";
  out.close();
  CHECK_THROWS_AS(load_audio(r.string()), FormatError);
}

TEST_CASE("save_wav/load_audio round trip is exact on the PCM16 grid") {
  auto p = temp_wav("roundtrip");
  AudioClip clip;
  clip.samples.resize(500);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = static_cast<double>(static_cast<int>(i) - 250) / 32768.0 * 64.0;
  save_wav(clip, p.string());
  AudioClip back = load_audio(p.string());
  CHECK(back.samples == clip.samples);
}
