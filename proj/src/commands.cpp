#include "selftalk/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>

#include <json.hpp>

#include "selftalk/checkpoint.hpp"
#include "selftalk/errors.hpp"
#include "selftalk/recognizer.hpp"
#include "selftalk/trainer.hpp"

namespace selftalk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t mixed_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::shared_ptr<SpeechRecognizer> build_recognizer(const RunConfig& cfg, const Corpus& corpus,
                                                   std::size_t latent_dim) {
  if (cfg.recognizer.backend == "external") {
    return std::make_shared<ExternalAsrAdapter>(cfg.recognizer.external_url, corpus.vocab,
                                                latent_dim);
  }
  MockRecognizerConfig mock;
  mock.vocab = corpus.vocab;
  mock.tone_hz = corpus.tone_hz;
  mock.window_seconds = corpus.window_seconds;
  mock.frames_per_window = cfg.recognizer.frames_per_window;
  mock.latent_dim = latent_dim;
  mock.epsilon = cfg.recognizer.epsilon;
  mock.embedding_seed = cfg.recognizer.embedding_seed;
  return std::make_shared<MockRecognizer>(std::move(mock));
}

// Bridges recognizer latents into the animator's external-encoder route.
struct RecognizerFeatures : AudioFeatureProvider {
  std::shared_ptr<const SpeechRecognizer> recognizer;
  explicit RecognizerFeatures(std::shared_ptr<const SpeechRecognizer> rec)
      : recognizer(std::move(rec)) {}
  FeatureSequence audio_features(const AudioClip& audio) const override {
    return recognizer->recognize(audio).latents;
  }
};

struct ModelBundle {
  std::shared_ptr<SpeechRecognizer> recognizer;
  std::unique_ptr<FacialAnimator> animator;
  std::unique_ptr<LipReadingInterpreter> lipreader;
};

ModelBundle build_models(const RunConfig& cfg, const Corpus& corpus) {
  ModelBundle bundle;
  LipReaderConfig lip_cfg = cfg.lipreader;
  lip_cfg.vocab_size = corpus.vocab.size();

  bundle.recognizer = build_recognizer(cfg, corpus, lip_cfg.latent_dim);

  AnimatorConfig anim_cfg = cfg.animator;
  anim_cfg.fps = corpus.fps;
  anim_cfg.vertex_count = corpus.mesh.vertex_count();
  std::shared_ptr<const AudioFeatureProvider> provider;
  if (anim_cfg.encoder_kind == EncoderKind::ExternalAdapter) {
    anim_cfg.external_feature_dim = bundle.recognizer->latent_dim();
    provider = std::make_shared<RecognizerFeatures>(bundle.recognizer);
  }
  bundle.animator =
      std::make_unique<FacialAnimator>(anim_cfg, mixed_seed(cfg.seed, 1), provider);
  bundle.lipreader = std::make_unique<LipReadingInterpreter>(
      lip_cfg, corpus.mesh.region(lip_cfg.lip_region).size(), mixed_seed(cfg.seed, 2));
  return bundle;
}

json checkpoint_snapshot(const RunConfig& cfg, const Corpus& corpus) {
  json snapshot;
  snapshot["format"] = "selftalk-checkpoint";
  snapshot["version"] = 1;
  json run = run_config_to_json(cfg);
  run["animator"]["fps"] = corpus.fps;
  run["animator"]["vertex_count"] = corpus.mesh.vertex_count();
  snapshot["run"] = run;
  snapshot["vocabulary"] = {{"symbols", corpus.vocab.symbols},
                            {"blank_index", corpus.vocab.blank_index}};
  json tones = json::object();
  for (std::size_t u = 0; u < corpus.vocab.size(); ++u) {
    if (u == corpus.vocab.blank_index) continue;
    tones[corpus.vocab.symbols[u]] = corpus.tone_hz[u];
  }
  snapshot["tones"] = tones;
  snapshot["window_seconds"] = corpus.window_seconds;
  return snapshot;
}

std::map<std::string, fs::path> scan_mseq(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("eval: not a directory: " + dir);
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".mseq") out[entry.path().stem().string()] = entry.path();
  }
  return out;
}

}  // namespace

void cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
  Corpus corpus = generate_synthetic_corpus(cfg.synth, cfg.seed);
  write_corpus(corpus, cfg.synth, cfg.seed, out_dir);
}

void cmd_train(const RunConfig& cfg, const std::string& corpus_dir, const std::string& out_dir) {
  Corpus corpus = load_corpus(corpus_dir);
  ModelBundle bundle = build_models(cfg, corpus);
  Trainer trainer(corpus, *bundle.animator, *bundle.lipreader, *bundle.recognizer, cfg.train);
  const json snapshot = checkpoint_snapshot(cfg, corpus);
  TrainOutcome outcome = trainer.train(out_dir, snapshot.dump(2));

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  json info;
  info["wall_seconds"] = outcome.log.wall_seconds;
  info["steps"] = outcome.log.steps.size();
  info["best_epoch"] = outcome.best_epoch;
  info["best_lve"] = outcome.best_lve;
  info["skipped_ctc"] = outcome.log.skipped_ctc;
  info["skipped_steps"] = outcome.log.skipped_steps;
  std::ofstream out(fs::path(out_dir) / "run_info.json", std::ios::trunc);
  if (!out) throw IoError("train: cannot write run_info.json");
  out << info.dump(2) << '\n';
}

InferResult cmd_infer(const RunConfig& cfg, const std::string& checkpoint_dir,
                      const std::string& wav_path, const std::string& mesh_path,
                      const std::string& regions_dir, const std::string& out_mseq) {
  std::ifstream snap_in(fs::path(checkpoint_dir) / "config.json");
  if (!snap_in) throw IoError("infer: unreadable checkpoint (missing config.json) in " +
                              checkpoint_dir);
  json snapshot;
  try {
    snap_in >> snapshot;
  } catch (const std::exception& e) {
    throw FormatError(std::string("infer: bad checkpoint config JSON: ") + e.what());
  }
  if (snapshot.value("format", "") != "selftalk-checkpoint")
    throw FormatError("infer: not a checkpoint config snapshot");

  RunConfig run = run_config_from_json(snapshot.at("run"));
  if (!cfg.recognizer.external_url.empty())
    run.recognizer.external_url = cfg.recognizer.external_url;

  Corpus shell;  // carries template/vocab/tones for model wiring
  shell.mesh = load_template(mesh_path, regions_dir);
  shell.vocab.symbols = snapshot.at("vocabulary").at("symbols").get<std::vector<std::string>>();
  shell.vocab.blank_index = snapshot.at("vocabulary").at("blank_index").get<std::size_t>();
  shell.vocab.validate();
  shell.tone_hz.assign(shell.vocab.size(), 0.0);
  for (const auto& [symbol, hz] : snapshot.at("tones").items()) {
    for (std::size_t u = 0; u < shell.vocab.size(); ++u)
      if (shell.vocab.symbols[u] == symbol) shell.tone_hz[u] = hz.get<double>();
  }
  shell.window_seconds = snapshot.at("window_seconds").get<double>();
  shell.fps = run.animator.fps;

  if (shell.mesh.vertex_count() != run.animator.vertex_count)
    throw MismatchError("infer: template vertex count does not match the checkpoint");

  ModelBundle bundle = build_models(run, shell);
  NamedParams params = bundle.animator->parameters();
  NamedParams lip = bundle.lipreader->parameters();
  params.insert(params.end(), lip.begin(), lip.end());
  load_parameter_archive(params, (fs::path(checkpoint_dir) / "params.bin").string());

  AudioClip audio = load_audio(wav_path);
  VertexSequence predicted = bundle.animator->animate(audio);
  save_vertex_sequence(predicted, out_mseq);

  InferResult result;
  result.frames = predicted.frames();
  result.lipread_transcript =
      bundle.lipreader->lipread(predicted, shell.mesh, shell.vocab).transcript;
  result.recognized_transcript = bundle.recognizer->recognize(audio).transcript;
  return result;
}

EvalReport cmd_eval(const RunConfig& cfg, const std::string& gt_dir, const std::string& pred_dir,
                    const std::string& mesh_path, const std::string& regions_dir,
                    const std::string& out_dir) {
  FaceMesh mesh = load_template(mesh_path, regions_dir);
  auto gt_files = scan_mseq(gt_dir);
  auto pred_files = scan_mseq(pred_dir);
  std::string missing;
  for (const auto& [id, path] : gt_files)
    if (!pred_files.count(id)) missing += " " + id + " (prediction)";
  for (const auto& [id, path] : pred_files)
    if (!gt_files.count(id)) missing += " " + id + " (ground truth)";
  if (!missing.empty()) throw MismatchError("eval: unmatched samples:" + missing);
  if (gt_files.empty()) throw InvalidArgument("eval: no .mseq files in " + gt_dir);

  std::vector<std::pair<VertexSequence, VertexSequence>> pairs;
  std::vector<EvalInstance> instances;
  pairs.reserve(gt_files.size());
  for (const auto& [id, path] : gt_files) {
    pairs.emplace_back(load_vertex_sequence(path.string()),
                       load_vertex_sequence(pred_files.at(id).string()));
  }
  std::size_t i = 0;
  for (const auto& [id, path] : gt_files) {
    instances.push_back({id, &pairs[i].first, &pairs[i].second});
    ++i;
  }
  EvalReport report = evaluate(instances, mesh, cfg.metrics);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_report_json(report, (fs::path(out_dir) / "report.json").string());
  write_report_csv(report, (fs::path(out_dir) / "report.csv").string());
  return report;
}

void cmd_export(const std::string& mseq_path, const std::string& mesh_path,
                const std::string& regions_dir, const std::string& out_dir,
                const std::string& format) {
  FaceMesh mesh = load_template(mesh_path, regions_dir);
  VertexSequence seq = load_vertex_sequence(mseq_path);
  if (seq.vertex_count() != mesh.vertex_count())
    throw MismatchError("export: sequence does not match the template");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw IoError("export: cannot create " + out_dir);

  if (format == "obj") {
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      FaceMesh posed = mesh;
      for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
        for (std::size_t ax = 0; ax < 3; ++ax) posed.vertices.at(v, ax) += seq.at(t, v, ax);
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%06zu.obj", t);
      save_obj(posed, (fs::path(out_dir) / name).string());
    }
    return;
  }
  if (format == "plot") {
    const auto& lips = mesh.region("lips");
    const double width = 840.0, height = 420.0, margin = 40.0;
    double lo = 0.0, hi = 0.0;
    for (std::size_t t = 0; t < seq.frames(); ++t)
      for (std::size_t v : lips)
        for (std::size_t ax = 0; ax < 3; ++ax) {
          lo = std::min(lo, seq.at(t, v, ax));
          hi = std::max(hi, seq.at(t, v, ax));
        }
    if (hi <= lo) hi = lo + 1e-9;
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ofstream svg(fs::path(out_dir) / "lip_trajectories.svg", std::ios::trunc);
    if (!svg) throw IoError("export: cannot write lip_trajectories.svg");
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    char buf[64];
    for (std::size_t j = 0; j < lips.size(); ++j) {
      for (std::size_t ax = 0; ax < 3; ++ax) {
        svg << "<polyline fill=\"none\" stroke=\"" << palette[j % 8]
            << "\" stroke-opacity=\"" << (ax == 0 ? "0.9" : ax == 1 ? "0.6" : "0.35")
            << "\" stroke-width=\"1\" points=\"";
        for (std::size_t t = 0; t < seq.frames(); ++t) {
          const double x =
              margin + (width - 2 * margin) *
                           (seq.frames() > 1
                                ? static_cast<double>(t) / static_cast<double>(seq.frames() - 1)
                                : 0.0);
          const double y = height - margin -
                           (height - 2 * margin) * (seq.at(t, lips[j], ax) - lo) / (hi - lo);
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
          svg << buf;
        }
        svg << "\"/>\n";
      }
    }
    svg << "</svg>\n";
    return;
  }
  throw InvalidArgument("export: unknown format \"" + format + "\" (use obj or plot)");
}

}  // namespace selftalk
