// config.hpp — one structured run configuration: file values, override JSON
// (CLI flags win), strict unknown-key rejection.
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "selftalk/animator.hpp"
#include "selftalk/corpus.hpp"
#include "selftalk/lipreader.hpp"
#include "selftalk/metrics.hpp"
#include "selftalk/trainer.hpp"

namespace selftalk {

struct RecognizerConfig {
  std::string backend = "mock";  // "mock" | "external"
  std::string external_url;
  std::size_t frames_per_window = 5;
  double epsilon = 1e-3;
  std::uint64_t embedding_seed = 0x5e1f;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string data_dir;  // defaulted from SELFTALK_DATA_DIR
  SynthConfig synth;
  AnimatorConfig animator;
  LipReaderConfig lipreader;
  TrainConfig train;
  MetricParams metrics;
  RecognizerConfig recognizer;
};

// Defaults <- config file (optional) <- overrides JSON (optional). Unknown
// keys anywhere are rejected. train.seed falls back to the master seed when
// the file does not pin it.
RunConfig load_run_config(const std::string& config_path, const std::string& overrides_json);

// Parse from an in-memory JSON object (same schema and strictness).
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace selftalk
