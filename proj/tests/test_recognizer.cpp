#include <doctest.h>

#include <httplib.h>

#include <cmath>
#include <thread>

#include "helpers/test_util.hpp"
#include "selftalk/corpus.hpp"
#include "selftalk/errors.hpp"
#include "selftalk/recognizer.hpp"

using namespace selftalk;

namespace {

MockRecognizerConfig mock_config_for(const Corpus& corpus) {
  MockRecognizerConfig cfg;
  cfg.vocab = corpus.vocab;
  cfg.tone_hz = corpus.tone_hz;
  cfg.window_seconds = corpus.window_seconds;
  cfg.latent_dim = 16;
  return cfg;
}

std::string base64_encode(const std::string& bytes) {
  static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += table[(v >> 6) & 63];
    out += table[v & 63];
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += table[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

}  // namespace

TEST_CASE("mock recognizer decodes the synthetic corpus exactly") {
  SynthConfig cfg;
  cfg.sample_count = 4;
  cfg.tokens_per_sample = 5;
  Corpus corpus = generate_synthetic_corpus(cfg, 33);
  MockRecognizer recognizer(mock_config_for(corpus));
  bool saw_repeat = false;
  for (const auto& sample : corpus.samples) {
    RecognizerOutput out = recognizer.recognize(sample.audio);
    CHECK(out.transcript == sample.transcript);
    out.logits.validate();
    CHECK(out.latents.values.rows == out.logits.probs.rows);
    for (std::size_t i = 1; i < sample.transcript.size(); ++i)
      if (sample.transcript[i] == sample.transcript[i - 1]) saw_repeat = true;
  }
  // The fixture must exercise the repeated-token path of the blank separator.
  CHECK(saw_repeat);
}

TEST_CASE("mock recognizer is deterministic and frozen") {
  SynthConfig cfg;
  cfg.sample_count = 1;
  Corpus corpus = generate_synthetic_corpus(cfg, 5);
  MockRecognizer recognizer(mock_config_for(corpus));
  const std::uint64_t before = recognizer.parameter_fingerprint();
  RecognizerOutput a = recognizer.recognize(corpus.samples[0].audio);
  RecognizerOutput b = recognizer.recognize(corpus.samples[0].audio);
  CHECK(a.transcript == b.transcript);
  CHECK(a.logits.probs.v == b.logits.probs.v);
  CHECK(a.latents.values.v == b.latents.values.v);
  CHECK(recognizer.parameter_fingerprint() == before);
}

TEST_CASE("mock recognizer on silence: empty transcript, valid rows") {
  SynthConfig cfg;
  cfg.sample_count = 1;
  Corpus corpus = generate_synthetic_corpus(cfg, 5);
  MockRecognizer recognizer(mock_config_for(corpus));
  AudioClip silence;
  silence.samples.assign(16000, 0.0);
  RecognizerOutput out = recognizer.recognize(silence);
  CHECK(out.transcript.empty());
  out.logits.validate();
  CHECK(out.logits.probs.rows == 25);  // 5 windows x 5 frames
}

TEST_CASE("mock recognizer latents are the window token embeddings") {
  SynthConfig cfg;
  cfg.sample_count = 1;
  cfg.tokens_per_sample = 2;
  Corpus corpus = generate_synthetic_corpus(cfg, 9);
  MockRecognizerConfig mc = mock_config_for(corpus);
  MockRecognizer recognizer(mc);
  const auto& sample = corpus.samples[0];
  RecognizerOutput out = recognizer.recognize(sample.audio);
  const std::size_t tok0 = corpus.vocab.index_of(sample.transcript[0]);
  for (std::size_t d = 0; d < mc.latent_dim; ++d)
    CHECK(out.latents.values.at(0, d) == recognizer.embeddings().at(tok0, d));
}

TEST_CASE("external adapter: round trip through a canned HTTP backend") {
  Vocabulary vocab = Vocabulary::toy(2);  // U = 3
  const std::size_t frames = 4, backend_dim = 8;

  std::vector<float> latents(frames * backend_dim);
  for (std::size_t i = 0; i < latents.size(); ++i) latents[i] = 0.25f * static_cast<float>(i % 7);
  std::string latent_bytes(reinterpret_cast<const char*>(latents.data()), latents.size() * 4);

  httplib::Server server;
  int hits = 0;
  server.Post("/recognize", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    CHECK(req.body.substr(0, 4) == "RIFF");
    std::string frames_json;
    for (std::size_t t = 0; t < frames; ++t) {
      frames_json += R"({"probs":[0.2,0.5,0.3]})";
      if (t + 1 < frames) frames_json += ",";
    }
    res.set_content(std::string(R"({"transcript":"ab","frames":[)") + frames_json +
                        R"(],"latents":")" + base64_encode(latent_bytes) + R"("})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ExternalAsrAdapter adapter("http://127.0.0.1:" + std::to_string(port), vocab, 5);
  AudioClip clip;
  clip.samples.assign(3200, 0.1);
  RecognizerOutput out = adapter.recognize(clip);
  CHECK(out.transcript == "ab");
  CHECK(out.logits.probs.rows == frames);
  CHECK(out.logits.probs.cols == 3);
  out.logits.validate();
  // Backend width 8 projected to the configured 5 dims, deterministically.
  CHECK(out.latents.values.rows == frames);
  CHECK(out.latents.values.cols == 5);
  RecognizerOutput again = adapter.recognize(clip);
  CHECK(again.latents.values.v == out.latents.values.v);
  CHECK(hits == 2);

  server.stop();
  server_thread.join();
}

TEST_CASE("external adapter: unreachable backend raises BackendError") {
  ExternalAsrAdapter adapter("http://127.0.0.1:1", Vocabulary::toy(2), 4);
  AudioClip clip;
  clip.samples.assign(1600, 0.1);
  CHECK_THROWS_AS(adapter.recognize(clip), BackendError);
}

TEST_CASE("external adapter: malformed responses are rejected") {
  httplib::Server server;
  std::string payload = "not json";
  server.Post("/recognize", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(payload, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ExternalAsrAdapter adapter("http://127.0.0.1:" + std::to_string(port), Vocabulary::toy(2), 4);
  AudioClip clip;
  clip.samples.assign(1600, 0.1);
  CHECK_THROWS_AS(adapter.recognize(clip), FormatError);

  payload = R"({"transcript":"a","frames":[{"probs":[1.0]}],"latents":""})";
  CHECK_THROWS_AS(adapter.recognize(clip), MismatchError);  // width 1 != U 3

  server.stop();
  server_thread.join();
}
