#include "selftalk/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "selftalk/checkpoint.hpp"
#include "selftalk/errors.hpp"

namespace selftalk {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("train config: lr must be positive");
  if (epochs < 1) throw InvalidArgument("train config: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("train config: batch_size must be >= 1");
  if (weights.rec < 0 || weights.vel < 0 || weights.lat < 0 || weights.ctc < 0)
    throw InvalidArgument("train config: loss weights must be non-negative");
  if (!(metric_mu > 0.0)) throw InvalidArgument("train config: metric_mu must be positive");
}

void write_train_log_jsonl(const TrainLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_train_log_jsonl: cannot open " + path);
  char buf[512];
  for (const auto& s : log.steps) {
    char ctc_field[40];
    if (s.losses.ctc_skipped)
      std::snprintf(ctc_field, sizeof(ctc_field), "null");
    else
      std::snprintf(ctc_field, sizeof(ctc_field), "%.17g", s.losses.ctc);
    std::snprintf(buf, sizeof(buf),
                  "{\"type\":\"step\",\"step\":%zu,\"epoch\":%zu,\"sample\":\"%s\","
                  "\"rec\":%.17g,\"vel\":%.17g,\"lat\":%.17g,\"ctc\":%s,\"total\":%.17g,"
                  "\"ctc_skipped\":%s}\n",
                  s.step, s.epoch, s.sample_id.c_str(), s.losses.rec, s.losses.vel, s.losses.lat,
                  ctc_field, s.losses.total, s.losses.ctc_skipped ? "true" : "false");
    out << buf;
  }
  for (const auto& e : log.evals) {
    std::snprintf(buf, sizeof(buf),
                  "{\"type\":\"eval\",\"epoch\":%zu,\"lve\":%.17g,\"lrp\":%.17g,"
                  "\"char_accuracy\":%.17g}\n",
                  e.epoch, e.lve, e.lrp, e.char_accuracy);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "{\"type\":\"summary\",\"skipped_ctc\":%zu,\"skipped_steps\":%zu}\n",
                log.skipped_ctc, log.skipped_steps);
  out << buf;
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double epsilon)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  m_.resize(params_.size());
  v_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i].assign(params_[i].size(), 0.0);
    v_[i].assign(params_[i].size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) selftalk::zero_grad(p);
}

void Adam::step(double grad_scale) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (p.grad().empty()) continue;  // never touched by backward this step
    auto& values = p.values();
    const auto& grad = p.grad();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grad[j] * grad_scale;
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      values[j] -= lr_ * mhat / (std::sqrt(vhat) + epsilon_);
    }
  }
}

namespace {

std::vector<Tensor> trainable_tensors(const FacialAnimator& animator,
                                      const LipReadingInterpreter& lipreader) {
  std::vector<Tensor> out;
  for (const auto& p : animator.parameters())
    if (p.tensor.requires_grad()) out.push_back(p.tensor);
  for (const auto& p : lipreader.parameters())
    if (p.tensor.requires_grad()) out.push_back(p.tensor);
  return out;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  return seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch + 1));
}

}  // namespace

Trainer::Trainer(const Corpus& corpus, FacialAnimator& animator, LipReadingInterpreter& lipreader,
                 const SpeechRecognizer& recognizer, const TrainConfig& cfg)
    : corpus_(corpus),
      animator_(animator),
      lipreader_(lipreader),
      recognizer_(recognizer),
      cfg_(cfg),
      optimizer_(trainable_tensors(animator, lipreader), cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                 cfg.adam_epsilon) {
  cfg_.validate();
  if (corpus_.samples.empty()) throw InvalidArgument("trainer: empty corpus");
  const auto& mesh = corpus_.mesh;
  if (animator_.config().vertex_count != mesh.vertex_count())
    throw MismatchError("trainer: animator vertex count does not match the template");
  if (lipreader_.config().latent_dim != recognizer_.latent_dim())
    throw MismatchError("trainer: lip reader latent width does not match the recognizer");
  if (lipreader_.config().vocab_size != recognizer_.vocabulary().size())
    throw MismatchError("trainer: lip reader vocabulary does not match the recognizer");
  if (!mesh.has_region(lipreader_.config().lip_region))
    throw MismatchError("trainer: template lacks the lip region");
  if (cfg_.holdout_samples >= corpus_.samples.size())
    throw InvalidArgument("trainer: holdout leaves no training samples");

  aligned_gt_.reserve(corpus_.samples.size());
  for (const auto& sample : corpus_.samples) {
    if (sample.gt_offsets.vertex_count() != mesh.vertex_count())
      throw MismatchError("trainer: sample " + sample.sample_id + " does not match the template");
    aligned_gt_.push_back(align_to_fps(sample.gt_offsets, sample.audio, animator_.config().fps));
  }
}

const RecognizerOutput& Trainer::cached_recognition(const CorpusSample& sample) {
  auto it = recognition_cache_.find(sample.sample_id);
  if (it == recognition_cache_.end())
    it = recognition_cache_.emplace(sample.sample_id, recognizer_.recognize(sample.audio)).first;
  return it->second;
}

LossBreakdown Trainer::train_step(const CorpusSample& sample, bool lipreader_on_gt) {
  optimizer_.zero_grad();
  LossBreakdown breakdown = forward_backward(sample, lipreader_on_gt);
  if (std::isfinite(breakdown.total)) optimizer_.step();
  return breakdown;
}

LossBreakdown Trainer::forward_backward(const CorpusSample& sample, bool lipreader_on_gt) {
  std::size_t index = corpus_.samples.size();
  for (std::size_t i = 0; i < corpus_.samples.size(); ++i)
    if (corpus_.samples[i].sample_id == sample.sample_id) index = i;
  if (index == corpus_.samples.size())
    throw InvalidArgument("train_step: sample not part of the corpus");
  const VertexSequence& gt = aligned_gt_[index];
  const RecognizerOutput& heard = cached_recognition(sample);

  Tensor predicted = animator_.animate_graph(sample.audio);
  if (predicted.rows() != gt.frames())
    throw MismatchError("train_step: predicted frame count diverged from ground truth");
  Tensor gt_rows = Tensor::constant(gt.offsets);

  Tensor rec = rec_loss(predicted, gt_rows);
  Tensor vel = vel_loss(predicted, gt_rows);

  Tensor lip_input = lipreader_on_gt ? gt_rows : predicted;
  Tensor lip_latents = lipreader_.encode(lipreader_.select_lips(lip_input, corpus_.mesh));
  Tensor probs = lipreader_.decode_probs(lip_latents);

  Tensor audio_latents =
      Tensor::constant(resample_rows(heard.latents.values, predicted.rows()));
  Tensor lat = lat_loss(audio_latents, lip_latents);
  Tensor ctc = ctc_loss(probs, corpus_.vocab.encode(heard.transcript), corpus_.vocab.blank_index);

  TotalLoss total = total_loss(rec, vel, lat, ctc, cfg_.weights);
  if (!std::isfinite(total.breakdown.total)) {
    ++log_.skipped_steps;
    return total.breakdown;
  }
  if (total.breakdown.ctc_skipped) ++log_.skipped_ctc;

  backward(total.value);
  return total.breakdown;
}

EvalSnapshot Trainer::evaluate(std::size_t epoch) {
  EvalSnapshot snapshot;
  snapshot.epoch = epoch;
  const std::size_t first = cfg_.holdout_samples > 0
                                ? corpus_.samples.size() - cfg_.holdout_samples
                                : 0;
  // Per-epoch snapshots track LVE/LRP/transcript accuracy only; FDD needs
  // T >= 2 and belongs to the offline eval command.
  double acc = 0.0, lve_sum = 0.0, lrp_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = first; i < corpus_.samples.size(); ++i) {
    const auto& sample = corpus_.samples[i];
    VertexSequence predicted = animator_.animate(sample.audio);
    auto reading = lipreader_.lipread(predicted, corpus_.mesh, corpus_.vocab);
    acc += char_accuracy(cached_recognition(sample).transcript, reading.transcript);
    lve_sum += lve(aligned_gt_[i], predicted, corpus_.mesh);
    lrp_sum += lrp(aligned_gt_[i], predicted, corpus_.mesh, cfg_.metric_mu);
    ++count;
  }
  snapshot.lve = lve_sum / static_cast<double>(count);
  snapshot.lrp = lrp_sum / static_cast<double>(count);
  snapshot.char_accuracy = acc / static_cast<double>(count);
  return snapshot;
}

void Trainer::write_checkpoint(const std::string& dir, const std::string& config_json) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("trainer: cannot create checkpoint dir " + dir);
  NamedParams params = model_parameters();
  save_parameter_archive(params, (fs::path(dir) / "params.bin").string());
  std::ofstream cfg_out(fs::path(dir) / "config.json", std::ios::trunc);
  cfg_out << config_json << '\n';
  write_train_log_jsonl(log_, (fs::path(dir) / "train_log.jsonl").string());
}

NamedParams Trainer::model_parameters() const {
  NamedParams params = animator_.parameters();
  NamedParams lip = lipreader_.parameters();
  params.insert(params.end(), lip.begin(), lip.end());
  return params;
}

TrainOutcome Trainer::train(const std::string& out_dir, const std::string& config_snapshot_json,
                            std::size_t start_epoch) {
  const auto wall_start = std::chrono::steady_clock::now();
  TrainOutcome outcome;
  outcome.best_lve = std::numeric_limits<double>::infinity();

  const std::size_t train_count = corpus_.samples.size() - cfg_.holdout_samples;
  std::vector<std::size_t> order(train_count);

  for (std::size_t epoch = start_epoch; epoch < cfg_.epochs; ++epoch) {
    for (std::size_t i = 0; i < train_count; ++i) order[i] = i;
    Rng shuffle_rng(epoch_seed(cfg_.seed, epoch));
    shuffle_rng.shuffle(order);

    const bool warmup = epoch < cfg_.warmup_epochs;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
      optimizer_.zero_grad();
      std::size_t finite_samples = 0;
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t i = order[b];
        LossBreakdown losses = forward_backward(corpus_.samples[i], warmup);
        if (std::isfinite(losses.total)) ++finite_samples;
        ++step_count_;
        log_.steps.push_back({step_count_, epoch, corpus_.samples[i].sample_id, losses});
      }
      if (finite_samples > 0) optimizer_.step(1.0 / static_cast<double>(finite_samples));
    }

    const bool last_epoch = epoch + 1 == cfg_.epochs;
    const bool eval_due =
        last_epoch || (cfg_.eval_every > 0 && (epoch + 1) % cfg_.eval_every == 0);
    if (eval_due) {
      EvalSnapshot snapshot = evaluate(epoch);
      log_.evals.push_back(snapshot);
      if (snapshot.lve < outcome.best_lve) {
        outcome.best_lve = snapshot.lve;
        outcome.best_epoch = epoch;
        if (!out_dir.empty())
          write_checkpoint((fs::path(out_dir) / "ckpt_best").string(), config_snapshot_json);
      }
    }
    const bool checkpoint_due =
        last_epoch || (cfg_.checkpoint_every > 0 && (epoch + 1) % cfg_.checkpoint_every == 0);
    if (!out_dir.empty() && checkpoint_due) {
      write_checkpoint((fs::path(out_dir) / ("ckpt_epoch_" + std::to_string(epoch))).string(),
                       config_snapshot_json);
    }
  }

  log_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  outcome.log = log_;
  return outcome;
}

}  // namespace selftalk
