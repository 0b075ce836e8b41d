#include "selftalk/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "selftalk/errors.hpp"
#include "selftalk/rng.hpp"

namespace selftalk {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

// Quantized to the PCM16 grid so in-memory samples survive a WAV round trip
// bit-exactly.
double quantize_pcm16(double x) {
  double q = std::llround(x * 32768.0);
  if (q > 32767.0) q = 32767.0;
  if (q < -32768.0) q = -32768.0;
  return q / 32768.0;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

}  // namespace

void SynthConfig::validate() const {
  if (letters < 1) throw InvalidArgument("synth: letters must be >= 1");
  if (letters > 25) throw InvalidArgument("synth: toy vocabulary supports at most 25 letters");
  if (vertex_count < 12) throw InvalidArgument("synth: vertex_count must be >= 12");
  if (!(fps > 0.0)) throw InvalidArgument("synth: fps must be positive");
  if (tokens_per_sample < 1) throw InvalidArgument("synth: tokens_per_sample must be >= 1");
  if (sample_count < 1) throw InvalidArgument("synth: sample_count must be >= 1");
  if (!(token_seconds > 0.0)) throw InvalidArgument("synth: token_seconds must be positive");
  if (!(fade_seconds > 0.0) || fade_seconds >= token_seconds)
    throw InvalidArgument("synth: fade_seconds must lie in (0, token_seconds)");
  if (!(lip_amplitude > 0.0) || !(face_amplitude > 0.0))
    throw InvalidArgument("synth: amplitudes must be positive");
  if (!(tone_base_hz > 0.0) || !(tone_step_hz > 0.0))
    throw InvalidArgument("synth: tone frequencies must be positive");
  const double top = tone_base_hz + tone_step_hz * static_cast<double>(letters - 1);
  if (top >= AudioClip::kSampleRate / 2.0)
    throw InvalidArgument("synth: tones exceed the Nyquist frequency");
}

FaceMesh make_template_mesh(std::size_t vertex_count) {
  FaceMesh mesh;
  std::size_t rows = 0;
  for (std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(vertex_count)));
       r >= 2; --r) {
    if (vertex_count % r == 0 && vertex_count / r >= 2) {
      rows = r;
      break;
    }
  }
  if (rows >= 3) {
    const std::size_t cols = vertex_count / rows;
    mesh.vertices = Mat(vertex_count, 3);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double u = static_cast<double>(c) / static_cast<double>(cols - 1);
        const double w = static_cast<double>(r) / static_cast<double>(rows - 1);
        const std::size_t v = r * cols + c;
        mesh.vertices.at(v, 0) = (u - 0.5) * 0.15;
        mesh.vertices.at(v, 1) = (w - 0.5) * 0.20;
        mesh.vertices.at(v, 2) = 0.05 * (1.0 - (2 * u - 1) * (2 * u - 1)) *
                                 (1.0 - (2 * w - 1) * (2 * w - 1));
      }
    }
    for (std::size_t r = 0; r + 1 < rows; ++r) {
      for (std::size_t c = 0; c + 1 < cols; ++c) {
        const auto a = static_cast<std::uint32_t>(r * cols + c);
        const auto b = static_cast<std::uint32_t>(r * cols + c + 1);
        const auto d = static_cast<std::uint32_t>((r + 1) * cols + c);
        const auto e = static_cast<std::uint32_t>((r + 1) * cols + c + 1);
        mesh.faces.push_back({a, b, e});
        mesh.faces.push_back({a, e, d});
      }
    }
    // Lips: central band of the second row from the bottom (rows grow upward).
    std::vector<std::size_t> lips;
    for (std::size_t c = cols / 4; c < cols - cols / 4 && lips.size() < cols; ++c)
      lips.push_back(1 * cols + c);
    std::vector<std::size_t> upper;
    for (std::size_t c = 0; c < cols; ++c) upper.push_back((rows - 1) * cols + c);
    mesh.regions["lips"] = lips;
    mesh.regions["upper_face"] = upper;
  } else {
    // Vertex count with no usable grid factorization: spiral strip.
    mesh.vertices = Mat(vertex_count, 3);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      const double a = 2.399963229728653 * static_cast<double>(v);  // golden angle
      const double t = static_cast<double>(v) / static_cast<double>(vertex_count - 1);
      mesh.vertices.at(v, 0) = 0.075 * std::cos(a) * (0.3 + 0.7 * t);
      mesh.vertices.at(v, 1) = (t - 0.5) * 0.20;
      mesh.vertices.at(v, 2) = 0.05 * std::sin(a) * (0.3 + 0.7 * t);
    }
    for (std::size_t v = 0; v + 2 < vertex_count; ++v) {
      mesh.faces.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v + 1),
                            static_cast<std::uint32_t>(v + 2)});
    }
    std::vector<std::size_t> lips, upper;
    const std::size_t lip_count = std::max<std::size_t>(2, vertex_count / 8);
    for (std::size_t i = 0; i < lip_count; ++i) lips.push_back(vertex_count / 3 + i);
    for (std::size_t i = (3 * vertex_count) / 4; i < vertex_count; ++i) upper.push_back(i);
    mesh.regions["lips"] = lips;
    mesh.regions["upper_face"] = upper;
  }
  mesh.validate();
  return mesh;
}

Corpus generate_synthetic_corpus(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);

  Corpus corpus;
  corpus.fps = cfg.fps;
  corpus.window_seconds = cfg.token_seconds;
  corpus.mesh = make_template_mesh(cfg.vertex_count);
  corpus.vocab = Vocabulary::toy(cfg.letters);

  corpus.tone_hz.assign(corpus.vocab.size(), 0.0);
  for (std::size_t k = 0; k < cfg.letters; ++k)
    corpus.tone_hz[k + 1] = cfg.tone_base_hz + cfg.tone_step_hz * static_cast<double>(k);

  const std::size_t v3 = cfg.vertex_count * 3;
  std::vector<bool> is_lip(cfg.vertex_count, false);
  for (std::size_t v : corpus.mesh.region("lips")) is_lip[v] = true;

  corpus.canonical_poses = Mat(cfg.letters, v3);
  for (std::size_t k = 0; k < cfg.letters; ++k) {
    for (std::size_t v = 0; v < cfg.vertex_count; ++v) {
      const double amp = is_lip[v] ? cfg.lip_amplitude : cfg.face_amplitude;
      for (std::size_t ax = 0; ax < 3; ++ax)
        corpus.canonical_poses.at(k, 3 * v + ax) = to_f32(rng.normal(0.0, amp));
    }
  }
  // The token -> lip-pose map must be injective or later decoding oracles are
  // meaningless.
  for (std::size_t a = 0; a < cfg.letters; ++a) {
    for (std::size_t b = a + 1; b < cfg.letters; ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < v3; ++i) {
        const double d = corpus.canonical_poses.at(a, i) - corpus.canonical_poses.at(b, i);
        d2 += d * d;
      }
      if (!(d2 > 1e-14))
        throw FormatError("synthetic corpus: canonical poses collide; change the seed");
    }
  }

  const auto tone_samples =
      static_cast<std::size_t>(std::llround(cfg.token_seconds * AudioClip::kSampleRate));
  const double duration = cfg.token_seconds * static_cast<double>(cfg.tokens_per_sample);
  const auto frame_count =
      static_cast<std::size_t>(std::max<long long>(1, std::llround(duration * cfg.fps)));

  for (std::size_t s = 0; s < cfg.sample_count; ++s) {
    CorpusSample sample;
    char id[16];
    std::snprintf(id, sizeof(id), "s%03zu", s);
    sample.sample_id = id;

    std::vector<std::size_t> tokens(cfg.tokens_per_sample);
    for (auto& tok : tokens) tok = rng.index(cfg.letters);
    for (std::size_t tok : tokens) sample.transcript += corpus.vocab.symbols[tok + 1];

    sample.audio.samples.resize(tone_samples * cfg.tokens_per_sample);
    for (std::size_t j = 0; j < cfg.tokens_per_sample; ++j) {
      const double hz = corpus.tone_hz[tokens[j] + 1];
      for (std::size_t n = 0; n < tone_samples; ++n) {
        const double t = static_cast<double>(n) / AudioClip::kSampleRate;
        sample.audio.samples[j * tone_samples + n] =
            quantize_pcm16(cfg.tone_gain * std::sin(2.0 * kPi * hz * t));
      }
    }

    // Piecewise-linear pose timeline: each token's pose holds through its
    // window and cross-fades into the next during the trailing fade_seconds.
    // The fade-in from neutral happens in a pre-roll before frame 0, so the
    // first captured frame already carries the first pose.
    sample.gt_offsets.fps = cfg.fps;
    sample.gt_offsets.offsets = Mat(frame_count, v3);
    const double window = cfg.token_seconds;
    for (std::size_t t = 0; t < frame_count; ++t) {
      const double time = static_cast<double>(t) / cfg.fps;
      std::size_t j = static_cast<std::size_t>(time / window);
      if (j >= cfg.tokens_per_sample) j = cfg.tokens_per_sample - 1;
      const double local = time - static_cast<double>(j) * window;
      const std::size_t cur = tokens[j];
      double blend = 0.0;
      std::size_t nxt = cur;
      if (local > window - cfg.fade_seconds && j + 1 < cfg.tokens_per_sample) {
        blend = (local - (window - cfg.fade_seconds)) / cfg.fade_seconds;
        nxt = tokens[j + 1];
      }
      for (std::size_t i = 0; i < v3; ++i) {
        const double pose = (1.0 - blend) * corpus.canonical_poses.at(cur, i) +
                            blend * corpus.canonical_poses.at(nxt, i);
        sample.gt_offsets.offsets.at(t, i) = to_f32(pose);
      }
    }
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const SynthConfig& cfg, std::uint64_t seed,
                  const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "regions", ec);
  fs::create_directories(fs::path(dir) / "samples", ec);
  if (!fs::is_directory(dir)) throw IoError("write_corpus: cannot create " + dir);

  save_obj(corpus.mesh, (fs::path(dir) / "template.obj").string());
  for (const auto& [name, idx] : corpus.mesh.regions)
    save_region(idx, (fs::path(dir) / "regions" / (name + ".json")).string());
  save_vocabulary(corpus.vocab, (fs::path(dir) / "vocab.json").string());

  nlohmann::json manifest;
  manifest["format"] = "selftalk-corpus";
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["fps"] = corpus.fps;
  manifest["window_seconds"] = corpus.window_seconds;
  manifest["template"] = "template.obj";
  manifest["regions_dir"] = "regions";
  manifest["vocabulary"] = "vocab.json";
  manifest["config"] = {
      {"letters", cfg.letters},
      {"vertex_count", cfg.vertex_count},
      {"fps", cfg.fps},
      {"tokens_per_sample", cfg.tokens_per_sample},
      {"sample_count", cfg.sample_count},
      {"token_seconds", cfg.token_seconds},
      {"fade_seconds", cfg.fade_seconds},
      {"lip_amplitude", cfg.lip_amplitude},
      {"face_amplitude", cfg.face_amplitude},
      {"tone_base_hz", cfg.tone_base_hz},
      {"tone_step_hz", cfg.tone_step_hz},
      {"tone_gain", cfg.tone_gain},
  };
  nlohmann::json tones = nlohmann::json::object();
  for (std::size_t u = 0; u < corpus.vocab.size(); ++u) {
    if (u == corpus.vocab.blank_index) continue;
    tones[corpus.vocab.symbols[u]] = corpus.tone_hz[u];
  }
  manifest["tones"] = tones;

  nlohmann::json samples = nlohmann::json::array();
  for (const auto& sample : corpus.samples) {
    const std::string wav = "samples/" + sample.sample_id + ".wav";
    const std::string mseq = "samples/" + sample.sample_id + ".mseq";
    const std::string txt = "samples/" + sample.sample_id + ".txt";
    save_wav(sample.audio, (fs::path(dir) / wav).string());
    save_vertex_sequence(sample.gt_offsets, (fs::path(dir) / mseq).string());
    {
      std::ofstream out(fs::path(dir) / txt, std::ios::trunc);
      if (!out) throw IoError("write_corpus: cannot write transcript for " + sample.sample_id);
      out << sample.transcript << '\n';
    }
    samples.push_back({{"id", sample.sample_id},
                       {"wav", wav},
                       {"mseq", mseq},
                       {"transcript", txt}});
  }
  manifest["samples"] = samples;

  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("write_corpus: cannot write manifest");
  out << manifest.dump(2) << '\n';
}

Corpus load_corpus(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "manifest.json");
  if (!in) throw IoError("load_corpus: missing manifest in " + dir);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    throw FormatError(std::string("load_corpus: bad manifest JSON: ") + e.what());
  }
  if (manifest.value("format", "") != "selftalk-corpus")
    throw FormatError("load_corpus: not a corpus manifest");

  Corpus corpus;
  corpus.fps = manifest.at("fps").get<double>();
  corpus.window_seconds = manifest.value("window_seconds", 0.2);
  corpus.mesh = load_template((root / manifest.at("template").get<std::string>()).string(),
                              (root / manifest.at("regions_dir").get<std::string>()).string());
  corpus.vocab = load_vocabulary((root / manifest.at("vocabulary").get<std::string>()).string());

  corpus.tone_hz.assign(corpus.vocab.size(), 0.0);
  if (manifest.contains("tones")) {
    for (const auto& [symbol, hz] : manifest.at("tones").items()) {
      for (std::size_t u = 0; u < corpus.vocab.size(); ++u)
        if (corpus.vocab.symbols[u] == symbol) corpus.tone_hz[u] = hz.get<double>();
    }
  }

  for (const auto& entry : manifest.at("samples")) {
    CorpusSample sample;
    sample.sample_id = entry.at("id").get<std::string>();
    sample.audio = load_audio((root / entry.at("wav").get<std::string>()).string());
    sample.gt_offsets = load_vertex_sequence((root / entry.at("mseq").get<std::string>()).string());
    if (entry.contains("transcript"))
      sample.transcript = read_text_file((root / entry.at("transcript").get<std::string>()).string());
    if (sample.gt_offsets.vertex_count() != corpus.mesh.vertex_count())
      throw MismatchError("load_corpus: sample " + sample.sample_id +
                          " vertex count does not match the template");
    const double expected_frames = sample.audio.duration_seconds() * corpus.fps;
    if (std::fabs(static_cast<double>(sample.gt_offsets.frames()) - expected_frames) > 1.0)
      throw MismatchError("load_corpus: sample " + sample.sample_id +
                          " frame count is inconsistent with its audio duration");
    corpus.samples.push_back(std::move(sample));
  }
  if (corpus.samples.empty()) throw FormatError("load_corpus: corpus has no samples");
  return corpus;
}

}  // namespace selftalk
