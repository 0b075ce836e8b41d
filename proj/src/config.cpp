#include "selftalk/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw FormatError("config: " + where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw FormatError("config: unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void merge_into(json& base, const json& patch) {
  if (!patch.is_object()) {
    base = patch;
    return;
  }
  if (!base.is_object()) base = json::object();
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object())
      merge_into(base[key], value);
    else
      base[key] = value;
  }
}

void parse_synth(const json& j, SynthConfig& cfg) {
  reject_unknown(j,
                 {"letters", "vertex_count", "fps", "tokens_per_sample", "sample_count",
                  "token_seconds", "fade_seconds", "lip_amplitude", "face_amplitude",
                  "tone_base_hz", "tone_step_hz", "tone_gain"},
                 "synth");
  read(j, "letters", cfg.letters);
  read(j, "vertex_count", cfg.vertex_count);
  read(j, "fps", cfg.fps);
  read(j, "tokens_per_sample", cfg.tokens_per_sample);
  read(j, "sample_count", cfg.sample_count);
  read(j, "token_seconds", cfg.token_seconds);
  read(j, "fade_seconds", cfg.fade_seconds);
  read(j, "lip_amplitude", cfg.lip_amplitude);
  read(j, "face_amplitude", cfg.face_amplitude);
  read(j, "tone_base_hz", cfg.tone_base_hz);
  read(j, "tone_step_hz", cfg.tone_step_hz);
  read(j, "tone_gain", cfg.tone_gain);
}

void parse_animator(const json& j, AnimatorConfig& cfg) {
  reject_unknown(j,
                 {"feature_dim", "decoder_layers", "heads", "ffn_dim", "fps", "vertex_count",
                  "freeze_feature_frontend", "encoder_kind", "external_feature_dim", "output_scale"},
                 "animator");
  read(j, "feature_dim", cfg.feature_dim);
  read(j, "decoder_layers", cfg.decoder_layers);
  read(j, "heads", cfg.heads);
  read(j, "ffn_dim", cfg.ffn_dim);
  read(j, "fps", cfg.fps);
  read(j, "vertex_count", cfg.vertex_count);
  read(j, "freeze_feature_frontend", cfg.freeze_feature_frontend);
  read(j, "external_feature_dim", cfg.external_feature_dim);
  read(j, "output_scale", cfg.output_scale);
  if (j.contains("encoder_kind")) {
    const std::string kind = j.at("encoder_kind").get<std::string>();
    if (kind == "mock-conv")
      cfg.encoder_kind = EncoderKind::MockConv;
    else if (kind == "external-asr-adapter")
      cfg.encoder_kind = EncoderKind::ExternalAdapter;
    else
      throw FormatError("config: animator.encoder_kind must be \"mock-conv\" or "
                        "\"external-asr-adapter\"");
  }
}

void parse_lipreader(const json& j, LipReaderConfig& cfg) {
  reject_unknown(j, {"lip_region", "latent_dim", "encoder_layers", "heads", "ffn_dim"},
                 "lipreader");
  read(j, "lip_region", cfg.lip_region);
  read(j, "latent_dim", cfg.latent_dim);
  read(j, "encoder_layers", cfg.encoder_layers);
  read(j, "heads", cfg.heads);
  read(j, "ffn_dim", cfg.ffn_dim);
}

void parse_train(const json& j, TrainConfig& cfg, bool& seed_pinned) {
  reject_unknown(j,
                 {"lr", "batch_size", "epochs", "seed", "weights", "warmup_epochs",
                  "checkpoint_every", "eval_every", "holdout_samples", "adam_beta1", "adam_beta2",
                  "adam_epsilon", "metric_mu", "device"},
                 "train");
  read(j, "lr", cfg.lr);
  read(j, "batch_size", cfg.batch_size);
  read(j, "epochs", cfg.epochs);
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    seed_pinned = true;
  }
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    if (!w.is_array() || w.size() != 4)
      throw FormatError("config: train.weights must be an array of 4 numbers");
    cfg.weights.rec = w[0].get<double>();
    cfg.weights.vel = w[1].get<double>();
    cfg.weights.lat = w[2].get<double>();
    cfg.weights.ctc = w[3].get<double>();
  }
  read(j, "warmup_epochs", cfg.warmup_epochs);
  read(j, "checkpoint_every", cfg.checkpoint_every);
  read(j, "eval_every", cfg.eval_every);
  read(j, "holdout_samples", cfg.holdout_samples);
  read(j, "adam_beta1", cfg.adam_beta1);
  read(j, "adam_beta2", cfg.adam_beta2);
  read(j, "adam_epsilon", cfg.adam_epsilon);
  read(j, "metric_mu", cfg.metric_mu);
  read(j, "device", cfg.device);
}

void parse_metrics(const json& j, MetricParams& cfg) {
  reject_unknown(j, {"mu", "lve_aggregation", "lip_region", "upper_region"}, "metrics");
  read(j, "mu", cfg.mu);
  read(j, "lip_region", cfg.lip_region);
  read(j, "upper_region", cfg.upper_region);
  if (j.contains("lve_aggregation")) {
    const std::string agg = j.at("lve_aggregation").get<std::string>();
    if (agg == "max")
      cfg.lve_agg = LveAggregation::MaxThenMean;
    else if (agg == "mean")
      cfg.lve_agg = LveAggregation::MeanThenMean;
    else
      throw FormatError("config: metrics.lve_aggregation must be \"max\" or \"mean\"");
  }
}

void parse_recognizer(const json& j, RecognizerConfig& cfg) {
  reject_unknown(j, {"backend", "external_url", "frames_per_window", "epsilon", "embedding_seed"},
                 "recognizer");
  read(j, "backend", cfg.backend);
  read(j, "external_url", cfg.external_url);
  read(j, "frames_per_window", cfg.frames_per_window);
  read(j, "epsilon", cfg.epsilon);
  read(j, "embedding_seed", cfg.embedding_seed);
  if (cfg.backend != "mock" && cfg.backend != "external")
    throw FormatError("config: recognizer.backend must be \"mock\" or \"external\"");
  if (cfg.backend == "external" && cfg.external_url.empty())
    throw FormatError("config: recognizer.backend \"external\" needs external_url");
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  reject_unknown(
      j, {"seed", "data_dir", "synth", "animator", "lipreader", "train", "metrics", "recognizer"},
      "the top level");
  RunConfig cfg;
  if (const char* env = std::getenv("SELFTALK_DATA_DIR")) cfg.data_dir = env;
  read(j, "seed", cfg.seed);
  read(j, "data_dir", cfg.data_dir);
  bool train_seed_pinned = false;
  if (j.contains("synth")) parse_synth(j.at("synth"), cfg.synth);
  if (j.contains("animator")) parse_animator(j.at("animator"), cfg.animator);
  if (j.contains("lipreader")) parse_lipreader(j.at("lipreader"), cfg.lipreader);
  if (j.contains("train")) parse_train(j.at("train"), cfg.train, train_seed_pinned);
  if (j.contains("metrics")) parse_metrics(j.at("metrics"), cfg.metrics);
  if (j.contains("recognizer")) parse_recognizer(j.at("recognizer"), cfg.recognizer);
  if (!train_seed_pinned) cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::string& config_path, const std::string& overrides_json) {
  json merged = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("config: cannot open " + config_path);
    json file;
    try {
      in >> file;
    } catch (const std::exception& e) {
      throw FormatError("config: bad JSON in " + config_path + ": " + e.what());
    }
    merge_into(merged, file);
  }
  if (!overrides_json.empty()) {
    json overrides;
    try {
      overrides = json::parse(overrides_json);
    } catch (const std::exception& e) {
      throw FormatError(std::string("config: bad override JSON: ") + e.what());
    }
    merge_into(merged, overrides);
  }
  return run_config_from_json(merged);
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  if (!cfg.data_dir.empty()) j["data_dir"] = cfg.data_dir;
  j["synth"] = {
      {"letters", cfg.synth.letters},
      {"vertex_count", cfg.synth.vertex_count},
      {"fps", cfg.synth.fps},
      {"tokens_per_sample", cfg.synth.tokens_per_sample},
      {"sample_count", cfg.synth.sample_count},
      {"token_seconds", cfg.synth.token_seconds},
      {"fade_seconds", cfg.synth.fade_seconds},
      {"lip_amplitude", cfg.synth.lip_amplitude},
      {"face_amplitude", cfg.synth.face_amplitude},
      {"tone_base_hz", cfg.synth.tone_base_hz},
      {"tone_step_hz", cfg.synth.tone_step_hz},
      {"tone_gain", cfg.synth.tone_gain},
  };
  j["animator"] = {
      {"feature_dim", cfg.animator.feature_dim},
      {"decoder_layers", cfg.animator.decoder_layers},
      {"heads", cfg.animator.heads},
      {"ffn_dim", cfg.animator.ffn_dim},
      {"fps", cfg.animator.fps},
      {"vertex_count", cfg.animator.vertex_count},
      {"freeze_feature_frontend", cfg.animator.freeze_feature_frontend},
      {"encoder_kind", cfg.animator.encoder_kind == EncoderKind::MockConv
                           ? "mock-conv"
                           : "external-asr-adapter"},
      {"external_feature_dim", cfg.animator.external_feature_dim},
      {"output_scale", cfg.animator.output_scale},
  };
  j["lipreader"] = {
      {"lip_region", cfg.lipreader.lip_region},
      {"latent_dim", cfg.lipreader.latent_dim},
      {"encoder_layers", cfg.lipreader.encoder_layers},
      {"heads", cfg.lipreader.heads},
      {"ffn_dim", cfg.lipreader.ffn_dim},
  };
  j["train"] = {
      {"lr", cfg.train.lr},
      {"batch_size", cfg.train.batch_size},
      {"epochs", cfg.train.epochs},
      {"seed", cfg.train.seed},
      {"weights",
       {cfg.train.weights.rec, cfg.train.weights.vel, cfg.train.weights.lat,
        cfg.train.weights.ctc}},
      {"warmup_epochs", cfg.train.warmup_epochs},
      {"checkpoint_every", cfg.train.checkpoint_every},
      {"eval_every", cfg.train.eval_every},
      {"holdout_samples", cfg.train.holdout_samples},
      {"adam_beta1", cfg.train.adam_beta1},
      {"adam_beta2", cfg.train.adam_beta2},
      {"adam_epsilon", cfg.train.adam_epsilon},
      {"metric_mu", cfg.train.metric_mu},
      {"device", cfg.train.device},
  };
  j["metrics"] = {
      {"mu", cfg.metrics.mu},
      {"lve_aggregation", cfg.metrics.lve_agg == LveAggregation::MaxThenMean ? "max" : "mean"},
      {"lip_region", cfg.metrics.lip_region},
      {"upper_region", cfg.metrics.upper_region},
  };
  j["recognizer"] = {
      {"backend", cfg.recognizer.backend},
      {"external_url", cfg.recognizer.external_url},
      {"frames_per_window", cfg.recognizer.frames_per_window},
      {"epsilon", cfg.recognizer.epsilon},
      {"embedding_seed", cfg.recognizer.embedding_seed},
  };
  return j;
}

}  // namespace selftalk
