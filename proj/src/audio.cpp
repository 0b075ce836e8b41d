#include "selftalk/audio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::vector<double> resample_linear(const std::vector<double>& in, double src_rate,
                                    double dst_rate) {
  if (src_rate == dst_rate) return in;
  const std::size_t n = in.size();
  const std::size_t out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * dst_rate / src_rate)) + 1;
  std::vector<double> out(out_len);
  const double step = src_rate / dst_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    std::size_t i0 = static_cast<std::size_t>(pos);
    if (i0 >= n - 1) i0 = n - 1;
    const std::size_t i1 = (i0 + 1 < n) ? i0 + 1 : i0;
    const double f = pos - static_cast<double>(i0);
    out[i] = (1.0 - f) * in[i0] + f * in[i1];
  }
  return out;
}

}  // namespace

AudioClip load_audio(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_audio: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12) throw FormatError("load_audio: not a RIFF file: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw FormatError("load_audio: not a RIFF/WAVE file: " + path);

  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const char* id = bytes.data() + off;
    const std::uint32_t len = read_u32(p + off + 4);
    const std::size_t body = off + 8;
    if (body + len > bytes.size()) throw FormatError("load_audio: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw FormatError("load_audio: short fmt chunk");
      format = read_u16(p + body);
      channels = read_u16(p + body + 2);
      rate = read_u32(p + body + 4);
      bits = read_u16(p + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + body;
      data_len = len;
    }
    off = body + len + (len & 1);  // chunks are word aligned
  }
  if (format == 0 || data == nullptr) throw FormatError("load_audio: missing fmt/data chunk");
  if (format != 1 || bits != 16)
    throw FormatError("load_audio: unsupported codec (PCM16 required)");
  if (channels == 0 || channels > 2) throw FormatError("load_audio: unsupported channel count");
  if (rate == 0) throw FormatError("load_audio: zero sample rate");
  const std::size_t frames = data_len / (2u * channels);
  if (frames == 0) throw FormatError("load_audio: empty audio");

  std::vector<double> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const std::size_t byte = (i * channels + c) * 2;
      const std::int16_t s =
          static_cast<std::int16_t>(static_cast<std::uint16_t>(data[byte] | (data[byte + 1] << 8)));
      acc += static_cast<double>(s);
    }
    mono[i] = acc / (32768.0 * channels);
  }

  AudioClip clip;
  clip.samples = resample_linear(mono, static_cast<double>(rate), AudioClip::kSampleRate);
  if (clip.samples.empty()) throw FormatError("load_audio: empty audio after resampling");
  return clip;
}

std::string encode_wav(const AudioClip& clip) {
  if (clip.samples.empty()) throw InvalidArgument("encode_wav: empty clip");
  std::string body;
  body.reserve(44 + clip.samples.size() * 2);
  const std::uint32_t data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
  body += "RIFF";
  put_u32(body, 36 + data_len);
  body += "WAVE";
  body += "fmt ";
  put_u32(body, 16);
  put_u16(body, 1);  // PCM
  put_u16(body, 1);  // mono
  put_u32(body, AudioClip::kSampleRate);
  put_u32(body, AudioClip::kSampleRate * 2);
  put_u16(body, 2);
  put_u16(body, 16);
  body += "data";
  put_u32(body, data_len);
  for (double x : clip.samples) {
    double q = std::llround(x * 32768.0);
    if (q > 32767.0) q = 32767.0;
    if (q < -32768.0) q = -32768.0;
    put_u16(body, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return body;
}

void save_wav(const AudioClip& clip, const std::string& path) {
  const std::string body = encode_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_wav: cannot open " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("save_wav: write failed for " + path);
}

}  // namespace selftalk
