// Overfit fixtures: slower end-to-end checks that need a trained model.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "selftalk/commands.hpp"
#include "selftalk/config.hpp"
#include "selftalk/corpus.hpp"
#include "selftalk/recognizer.hpp"
#include "selftalk/trainer.hpp"

using namespace selftalk;
namespace fs = std::filesystem;

namespace {

struct MediumRig {
  Corpus corpus;
  FacialAnimator animator;
  LipReadingInterpreter lipreader;
  MockRecognizer recognizer;

  static SynthConfig synth_config() {
    SynthConfig cfg;
    cfg.letters = 3;
    cfg.vertex_count = 20;
    cfg.sample_count = 4;
    cfg.tokens_per_sample = 3;
    return cfg;
  }

  static AnimatorConfig animator_config(const Corpus& corpus) {
    AnimatorConfig cfg;
    cfg.feature_dim = 32;
    cfg.decoder_layers = 2;
    cfg.heads = 4;
    cfg.ffn_dim = 64;
    cfg.fps = corpus.fps;
    cfg.vertex_count = corpus.mesh.vertex_count();
    return cfg;
  }

  static LipReaderConfig lipreader_config(const Corpus& corpus) {
    LipReaderConfig cfg;
    cfg.latent_dim = 32;
    cfg.encoder_layers = 1;
    cfg.heads = 4;
    cfg.ffn_dim = 64;
    cfg.vocab_size = corpus.vocab.size();
    return cfg;
  }

  static MockRecognizerConfig mock_config(const Corpus& corpus) {
    MockRecognizerConfig cfg;
    cfg.vocab = corpus.vocab;
    cfg.tone_hz = corpus.tone_hz;
    cfg.window_seconds = corpus.window_seconds;
    cfg.latent_dim = 32;
    return cfg;
  }

  explicit MediumRig(Corpus c)
      : corpus(std::move(c)),
        animator(animator_config(corpus), 301),
        lipreader(lipreader_config(corpus), corpus.mesh.region("lips").size(), 302),
        recognizer(mock_config(corpus)) {}
};

TrainConfig overfit_config(std::size_t epochs, LossWeights weights = LossWeights{}) {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = epochs;
  cfg.seed = 21;
  cfg.weights = weights;
  cfg.eval_every = 0;
  cfg.checkpoint_every = 0;
  return cfg;
}

// Nearest canonical pose over lip columns; classifies an animated frame back
// to a token so transcript tracking can be checked without the lip reader.
std::size_t nearest_pose_token(const Corpus& corpus, const VertexSequence& seq, std::size_t t) {
  const auto cols = corpus.mesh.region_columns("lips");
  std::size_t best = 0;
  double best_d2 = 1e300;
  for (std::size_t k = 0; k < corpus.canonical_poses.rows; ++k) {
    double d2 = 0.0;
    for (std::size_t c : cols) {
      const double d = corpus.canonical_poses.at(k, c) - seq.offsets.at(t, c);
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("overfit fixture: poses, transcripts, and rec-loss targets") {
  MediumRig rig(generate_synthetic_corpus(MediumRig::synth_config(), 777));
  Trainer trainer(rig.corpus, rig.animator, rig.lipreader, rig.recognizer,
                  overfit_config(200));
  const double initial_rec = [&] {
    double acc = 0.0;
    for (const auto& s : rig.corpus.samples)
      acc += rec_loss(align_to_fps(s.gt_offsets, s.audio, rig.corpus.fps),
                      rig.animator.animate(s.audio));
    return acc / static_cast<double>(rig.corpus.samples.size());
  }();
  trainer.train("");

  double final_rec = 0.0;
  double lipread_gt_acc = 0.0, lipread_pred_acc = 0.0;
  std::size_t matched_frames = 0, total_frames = 0;
  for (const auto& sample : rig.corpus.samples) {
    VertexSequence aligned = align_to_fps(sample.gt_offsets, sample.audio, rig.corpus.fps);
    VertexSequence predicted = rig.animator.animate(sample.audio);
    final_rec += rec_loss(aligned, predicted) / static_cast<double>(rig.corpus.samples.size());

    const Transcript heard = rig.recognizer.recognize(sample.audio).transcript;
    lipread_gt_acc +=
        char_accuracy(heard, rig.lipreader.lipread(aligned, rig.corpus.mesh, rig.corpus.vocab)
                                 .transcript);
    lipread_pred_acc +=
        char_accuracy(heard, rig.lipreader.lipread(predicted, rig.corpus.mesh, rig.corpus.vocab)
                                 .transcript);

    // Every frame's nearest canonical lip pose must name its window's token.
    const auto window_frames = static_cast<std::size_t>(
        std::llround(rig.corpus.window_seconds * rig.corpus.fps));
    for (std::size_t t = 0; t < predicted.frames(); ++t) {
      const std::size_t window = std::min(t / window_frames, sample.transcript.size() - 1);
      const std::size_t expected =
          rig.corpus.vocab.index_of(sample.transcript[window]) - 1;  // pose row
      ++total_frames;
      if (nearest_pose_token(rig.corpus, predicted, t) == expected) ++matched_frames;
    }
  }
  lipread_gt_acc /= static_cast<double>(rig.corpus.samples.size());
  lipread_pred_acc /= static_cast<double>(rig.corpus.samples.size());

  CHECK(final_rec < 0.01 * initial_rec);
  CHECK(lipread_gt_acc >= 0.90);
  CHECK(lipread_pred_acc >= 0.90);
  CHECK(static_cast<double>(matched_frames) >=
        0.95 * static_cast<double>(total_frames));
}

TEST_CASE("overfit fixture: silence maps to a near-constant offset sequence") {
  // Corpus of silence -> neutral pairs, plus one tone sample so the toy
  // vocabulary stays exercised.
  Corpus corpus = generate_synthetic_corpus(MediumRig::synth_config(), 778);
  for (std::size_t s = 0; s + 1 < corpus.samples.size(); ++s) {
    auto& sample = corpus.samples[s];
    std::fill(sample.audio.samples.begin(), sample.audio.samples.end(), 0.0);
    std::fill(sample.gt_offsets.offsets.v.begin(), sample.gt_offsets.offsets.v.end(), 0.0);
    sample.transcript.clear();
  }
  MediumRig rig(std::move(corpus));
  Trainer trainer(rig.corpus, rig.animator, rig.lipreader, rig.recognizer,
                  overfit_config(150, {1.0, 0.0, 0.0, 0.0}));
  trainer.train("");

  AudioClip silence;
  silence.samples.assign(static_cast<std::size_t>(16000 * 0.6), 0.0);
  VertexSequence out = rig.animator.animate(silence);
  double worst_dev = 0.0, scale = 0.0;
  for (std::size_t c = 0; c < out.offsets.cols; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < out.frames(); ++t) mean += out.offsets.at(t, c);
    mean /= static_cast<double>(out.frames());
    for (std::size_t t = 0; t < out.frames(); ++t)
      worst_dev = std::max(worst_dev, std::fabs(out.offsets.at(t, c) - mean));
  }
  for (double x : rig.corpus.canonical_poses.v) scale = std::max(scale, std::fabs(x));
  // Temporal wobble on silence stays far below the pose scale.
  CHECK(worst_dev < 0.05 * scale);
}

TEST_CASE("command path: synth -> train -> infer transcripts agree") {
  const fs::path root = fs::temp_directory_path() / "selftalk_integration";
  fs::remove_all(root);
  fs::create_directories(root);

  RunConfig cfg = load_run_config("", R"({
    "seed": 404,
    "synth": {"letters": 3, "vertex_count": 20, "sample_count": 4, "tokens_per_sample": 3},
    "animator": {"feature_dim": 32, "decoder_layers": 2, "heads": 4, "ffn_dim": 64},
    "lipreader": {"latent_dim": 32, "encoder_layers": 1, "heads": 4, "ffn_dim": 64},
    "train": {"lr": 0.001, "epochs": 200, "eval_every": 50, "checkpoint_every": 0}
  })");

  const std::string corpus_dir = (root / "corpus").string();
  const std::string run_dir = (root / "run").string();
  cmd_synth(cfg, corpus_dir);
  cmd_train(cfg, corpus_dir, run_dir);
  REQUIRE(fs::exists(fs::path(run_dir) / "ckpt_best" / "params.bin"));
  REQUIRE(fs::exists(fs::path(run_dir) / "ckpt_epoch_199" / "train_log.jsonl"));

  Corpus corpus = load_corpus(corpus_dir);
  double acc = 0.0;
  for (const auto& sample : corpus.samples) {
    const std::string out_mseq = (root / (sample.sample_id + "_pred.mseq")).string();
    InferResult result =
        cmd_infer(cfg, (fs::path(run_dir) / "ckpt_epoch_199").string(),
                  (fs::path(corpus_dir) / "samples" / (sample.sample_id + ".wav")).string(),
                  (fs::path(corpus_dir) / "template.obj").string(),
                  (fs::path(corpus_dir) / "regions").string(), out_mseq);
    acc += char_accuracy(result.recognized_transcript, result.lipread_transcript);

    VertexSequence written = load_vertex_sequence(out_mseq);
    const auto expected = static_cast<std::size_t>(
        std::llround(sample.audio.duration_seconds() * corpus.fps));
    CHECK(written.frames() == expected);
    CHECK(written.vertex_count() == corpus.mesh.vertex_count());
  }
  acc /= static_cast<double>(corpus.samples.size());
  CHECK(acc >= 0.90);
}
