// trainer.hpp — the commutative training loop: animator and lip reader are
// optimized jointly against the frozen recognizer's latents and
// pseudo-transcripts; Adam, seeded shuffling, checkpoints, deterministic logs.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selftalk/animator.hpp"
#include "selftalk/corpus.hpp"
#include "selftalk/lipreader.hpp"
#include "selftalk/losses.hpp"
#include "selftalk/metrics.hpp"
#include "selftalk/recognizer.hpp"

namespace selftalk {

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch_size = 1;
  std::size_t epochs = 250;
  std::uint64_t seed = 1;
  LossWeights weights;
  std::size_t warmup_epochs = 0;      // lip reader trains on GT offsets first
  std::size_t checkpoint_every = 50;  // epochs; 0 = final/best only
  std::size_t eval_every = 10;        // epochs between eval snapshots; 0 = final only
  std::size_t holdout_samples = 0;    // eval slice from the corpus tail; 0 = all
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double metric_mu = 1e-4;
  std::string device = "cpu";  // hint only; execution is CPU

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  std::string sample_id;
  LossBreakdown losses;
};

struct EvalSnapshot {
  std::size_t epoch = 0;
  double lve = 0.0;
  double lrp = 0.0;
  double char_accuracy = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EvalSnapshot> evals;
  std::size_t skipped_ctc = 0;
  std::size_t skipped_steps = 0;
  double wall_seconds = 0.0;  // reported separately, never in the JSONL
};

// Deterministic fields only (steps, evals, skip counters).
void write_train_log_jsonl(const TrainLog& log, const std::string& path);

class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double epsilon);
  void zero_grad();
  void step(double grad_scale = 1.0);
  std::size_t size() const { return params_.size(); }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
};

struct TrainOutcome {
  TrainLog log;
  std::size_t best_epoch = 0;
  double best_lve = 0.0;
};

class Trainer {
 public:
  // Wiring is validated here: template size, latent widths, vocabulary sizes
  // and frame counts must agree before step 1.
  Trainer(const Corpus& corpus, FacialAnimator& animator, LipReadingInterpreter& lipreader,
          const SpeechRecognizer& recognizer, const TrainConfig& cfg);

  // One optimizer step on one sample. With lipreader_on_gt the lip branch
  // consumes ground-truth offsets (warmup), so lip losses cannot reach the
  // animator.
  LossBreakdown train_step(const CorpusSample& sample, bool lipreader_on_gt = false);

  // Full loop; writes ckpt_epoch_<n>/ directories (params + config snapshot +
  // cumulative train_log.jsonl) plus ckpt_best when out_dir is non-empty.
  TrainOutcome train(const std::string& out_dir, const std::string& config_snapshot_json = "{}",
                     std::size_t start_epoch = 0);

  EvalSnapshot evaluate(std::size_t epoch);
  // Forward + backward without an optimizer step (gradient accumulation).
  LossBreakdown forward_backward(const CorpusSample& sample, bool lipreader_on_gt = false);
  const TrainLog& log() const { return log_; }
  NamedParams model_parameters() const;

 private:
  const RecognizerOutput& cached_recognition(const CorpusSample& sample);
  void write_checkpoint(const std::string& dir, const std::string& config_json);

  const Corpus& corpus_;
  FacialAnimator& animator_;
  LipReadingInterpreter& lipreader_;
  const SpeechRecognizer& recognizer_;
  TrainConfig cfg_;
  std::vector<VertexSequence> aligned_gt_;  // per sample, on the animator fps grid
  std::map<std::string, RecognizerOutput> recognition_cache_;
  Adam optimizer_;
  TrainLog log_;
  std::size_t step_count_ = 0;
};

}  // namespace selftalk
