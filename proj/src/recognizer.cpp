#include "selftalk/recognizer.hpp"

#include <cmath>
#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "selftalk/errors.hpp"
#include "selftalk/rng.hpp"

namespace selftalk {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t fnv_mix(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Single-bin DFT power at one frequency.
double tone_power(const double* samples, std::size_t n, double hz, double rate) {
  double re = 0.0, im = 0.0;
  const double w = 2.0 * kPi * hz / rate;
  for (std::size_t i = 0; i < n; ++i) {
    re += samples[i] * std::cos(w * static_cast<double>(i));
    im -= samples[i] * std::sin(w * static_cast<double>(i));
  }
  return re * re + im * im;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  int acc = 0, bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = value_of(c);
    if (v < 0) throw FormatError("base64: invalid character");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace

MockRecognizer::MockRecognizer(MockRecognizerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.vocab.validate();
  if (cfg_.tone_hz.size() != cfg_.vocab.size())
    throw InvalidArgument("mock recognizer: tone table does not match the vocabulary");
  if (cfg_.frames_per_window < 2)
    throw InvalidArgument("mock recognizer: needs at least 2 frames per window");
  if (!(cfg_.window_seconds > 0.0))
    throw InvalidArgument("mock recognizer: window_seconds must be positive");
  if (cfg_.latent_dim == 0) throw InvalidArgument("mock recognizer: latent_dim must be positive");
  Rng rng(cfg_.embedding_seed);
  embeddings_ = Mat(cfg_.vocab.size(), cfg_.latent_dim);
  for (double& x : embeddings_.v) x = rng.normal();
}

RecognizerOutput MockRecognizer::recognize(const AudioClip& audio) const {
  if (audio.samples.empty()) throw InvalidArgument("mock recognizer: empty audio");
  const std::size_t U = cfg_.vocab.size();
  const auto window =
      static_cast<std::size_t>(std::llround(cfg_.window_seconds * AudioClip::kSampleRate));
  const std::size_t n = audio.samples.size();
  std::size_t windows = n / window;
  if (windows == 0 || n - windows * window >= window / 2) ++windows;

  const std::size_t frames = windows * cfg_.frames_per_window;
  RecognizerOutput out;
  out.logits.probs = Mat(frames, U);
  out.logits.fps = static_cast<double>(cfg_.frames_per_window) / cfg_.window_seconds;
  out.latents.values = Mat(frames, cfg_.latent_dim);
  out.latents.fps = out.logits.fps;

  const double off = cfg_.epsilon / static_cast<double>(U - 1);
  for (std::size_t w = 0; w < windows; ++w) {
    const std::size_t begin = w * window;
    const std::size_t count = std::min(window, n - begin);
    double peak = 0.0;
    for (std::size_t i = 0; i < count; ++i)
      peak = std::max(peak, std::fabs(audio.samples[begin + i]));

    std::size_t token = cfg_.vocab.blank_index;
    if (peak > 1e-9) {
      double best_power = -1.0;
      for (std::size_t u = 0; u < U; ++u) {
        if (u == cfg_.vocab.blank_index || !(cfg_.tone_hz[u] > 0.0)) continue;
        const double p = tone_power(audio.samples.data() + begin, count, cfg_.tone_hz[u],
                                    AudioClip::kSampleRate);
        if (p > best_power) {
          best_power = p;
          token = u;
        }
      }
    }

    for (std::size_t f = 0; f < cfg_.frames_per_window; ++f) {
      const std::size_t row = w * cfg_.frames_per_window + f;
      // The trailing frame of every window is a blank so repeated tokens
      // survive greedy collapsing.
      const std::size_t symbol =
          (f + 1 == cfg_.frames_per_window) ? cfg_.vocab.blank_index : token;
      for (std::size_t u = 0; u < U; ++u)
        out.logits.probs.at(row, u) = (u == symbol) ? 1.0 - cfg_.epsilon : off;
      for (std::size_t d = 0; d < cfg_.latent_dim; ++d)
        out.latents.values.at(row, d) = embeddings_.at(token, d);
    }
  }
  out.transcript = greedy_ctc_decode(out.logits, cfg_.vocab);
  return out;
}

std::uint64_t MockRecognizer::parameter_fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : embeddings_.v) h = fnv_mix(h, &v, sizeof(v));
  h = fnv_mix(h, &cfg_.epsilon, sizeof(cfg_.epsilon));
  return h;
}

ExternalAsrAdapter::ExternalAsrAdapter(std::string base_url, Vocabulary vocab,
                                       std::size_t latent_dim, std::uint64_t projection_seed)
    : base_url_(std::move(base_url)),
      vocab_(std::move(vocab)),
      latent_dim_(latent_dim),
      projection_seed_(projection_seed) {
  vocab_.validate();
  if (latent_dim_ == 0) throw InvalidArgument("asr adapter: latent_dim must be positive");
}

RecognizerOutput ExternalAsrAdapter::recognize(const AudioClip& audio) const {
  httplib::Client client(base_url_);
  client.set_read_timeout(30, 0);
  auto res = client.Post("/recognize", encode_wav(audio), "audio/wav");
  if (!res) throw BackendError("asr adapter: backend unavailable at " + base_url_);
  if (res->status != 200)
    throw BackendError("asr adapter: backend returned status " + std::to_string(res->status));

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const std::exception& e) {
    throw FormatError(std::string("asr adapter: bad JSON response: ") + e.what());
  }

  const auto& frames = body.at("frames");
  const std::size_t T = frames.size();
  if (T == 0) throw FormatError("asr adapter: response has no frames");
  const std::size_t U = vocab_.size();

  RecognizerOutput out;
  out.transcript = body.at("transcript").get<std::string>();
  out.logits.probs = Mat(T, U);
  out.logits.fps = static_cast<double>(T) / audio.duration_seconds();
  for (std::size_t t = 0; t < T; ++t) {
    const auto& probs = frames[t].at("probs");
    if (probs.size() != U)
      throw MismatchError("asr adapter: frame width does not match the vocabulary");
    double sum = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      out.logits.probs.at(t, u) = probs[u].get<double>();
      sum += out.logits.probs.at(t, u);
    }
    if (!(std::fabs(sum - 1.0) <= 1e-3))
      throw FormatError("asr adapter: frame probabilities do not sum to 1");
    for (std::size_t u = 0; u < U; ++u) out.logits.probs.at(t, u) /= sum;
  }

  const auto raw = base64_decode(body.at("latents").get<std::string>());
  if (raw.size() % (4 * T) != 0)
    throw FormatError("asr adapter: latent payload size does not divide into frames");
  const std::size_t backend_dim = raw.size() / (4 * T);
  if (backend_dim == 0) throw FormatError("asr adapter: empty latents");
  Mat backend(T, backend_dim);
  for (std::size_t i = 0; i < backend.v.size(); ++i) {
    float f;
    std::memcpy(&f, raw.data() + 4 * i, 4);
    if (!std::isfinite(f)) throw FormatError("asr adapter: non-finite latent value");
    backend.v[i] = static_cast<double>(f);
  }

  if (backend_dim == latent_dim_) {
    out.latents.values = std::move(backend);
  } else {
    // Frozen random projection; regenerated deterministically from the seed.
    Rng rng(projection_seed_ ^ (static_cast<std::uint64_t>(backend_dim) << 20));
    Mat projection(backend_dim, latent_dim_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(backend_dim));
    for (double& x : projection.v) x = rng.normal(0.0, scale);
    out.latents.values = Mat(T, latent_dim_);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t k = 0; k < backend_dim; ++k) {
        const double x = backend.at(t, k);
        for (std::size_t d = 0; d < latent_dim_; ++d)
          out.latents.values.at(t, d) += x * projection.at(k, d);
      }
  }
  out.latents.fps = out.logits.fps;
  return out;
}

std::uint64_t ExternalAsrAdapter::parameter_fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  h = fnv_mix(h, &projection_seed_, sizeof(projection_seed_));
  h = fnv_mix(h, &latent_dim_, sizeof(latent_dim_));
  return h;
}

}  // namespace selftalk
