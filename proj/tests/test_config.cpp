#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "selftalk/config.hpp"
#include "selftalk/errors.hpp"

using namespace selftalk;
namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("selftalk_cfg_" + name + ".json");
  std::ofstream out(p, std::ios::trunc);
  out << text;
  return p.string();
}

}  // namespace

TEST_CASE("defaults match the documented desk-scale setup") {
  RunConfig cfg = load_run_config("", "");
  CHECK(cfg.seed == 1);
  CHECK(cfg.synth.letters == 6);
  CHECK(cfg.synth.vertex_count == 50);
  CHECK(cfg.synth.sample_count == 8);
  CHECK(cfg.animator.feature_dim == 64);
  CHECK(cfg.animator.decoder_layers == 4);
  CHECK(cfg.lipreader.latent_dim == 64);
  CHECK(cfg.train.lr == 1e-4);
  CHECK(cfg.train.epochs == 250);
  CHECK(cfg.train.batch_size == 1);
  CHECK(cfg.train.weights.rec == 1000.0);
  CHECK(cfg.train.weights.vel == 1000.0);
  CHECK(cfg.train.weights.lat == 0.001);
  CHECK(cfg.train.weights.ctc == 0.0001);
  CHECK(cfg.metrics.mu == 1e-4);
  CHECK(cfg.metrics.lve_agg == LveAggregation::MaxThenMean);
  CHECK(cfg.recognizer.backend == "mock");
}

TEST_CASE("file values load and overrides win over the file") {
  std::string path = write_config("prec", R"({
    "seed": 5,
    "train": {"epochs": 10, "lr": 0.002},
    "metrics": {"mu": 0.01}
  })");
  RunConfig from_file = load_run_config(path, "");
  CHECK(from_file.seed == 5);
  CHECK(from_file.train.epochs == 10);
  CHECK(from_file.train.lr == 0.002);
  CHECK(from_file.metrics.mu == 0.01);
  CHECK(from_file.train.seed == 5);  // master seed flows into the trainer

  RunConfig overridden = load_run_config(path, R"({"train": {"epochs": 99}, "seed": 6})");
  CHECK(overridden.train.epochs == 99);
  CHECK(overridden.train.lr == 0.002);  // untouched file value survives
  CHECK(overridden.seed == 6);
  CHECK(overridden.train.seed == 6);
}

TEST_CASE("explicit train.seed decouples from the master seed") {
  RunConfig cfg = load_run_config("", R"({"seed": 9, "train": {"seed": 3}})");
  CHECK(cfg.seed == 9);
  CHECK(cfg.train.seed == 3);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(load_run_config("", R"({"bogus": 1})"), doctest::Contains("bogus"),
                       FormatError);
  CHECK_THROWS_WITH_AS(load_run_config("", R"({"train": {"learning_rate": 0.1}})"),
                       doctest::Contains("learning_rate"), FormatError);
  CHECK_THROWS_AS(load_run_config("", R"({"metrics": {"mu": 1, "nu": 2}})"), FormatError);
}

TEST_CASE("weights must be a 4-element array") {
  CHECK_THROWS_AS(load_run_config("", R"({"train": {"weights": [1, 2, 3]}})"), FormatError);
  RunConfig cfg = load_run_config("", R"({"train": {"weights": [1, 2, 3, 4]}})");
  CHECK(cfg.train.weights.ctc == 4.0);
}

TEST_CASE("enumerated fields validate their values") {
  RunConfig ext = load_run_config(
      "", R"({"animator": {"encoder_kind": "external-asr-adapter"},
              "recognizer": {"backend": "external", "external_url": "http://x"}})");
  CHECK(ext.animator.encoder_kind == EncoderKind::ExternalAdapter);
  CHECK(ext.recognizer.backend == "external");

  CHECK_THROWS_AS(load_run_config("", R"({"animator": {"encoder_kind": "wavenet"}})"),
                  FormatError);
  CHECK_THROWS_AS(load_run_config("", R"({"metrics": {"lve_aggregation": "median"}})"),
                  FormatError);
  CHECK_THROWS_AS(load_run_config("", R"({"recognizer": {"backend": "external"}})"), FormatError);
}

TEST_CASE("config serialization round trips through the parser") {
  RunConfig cfg = load_run_config("", R"({
    "seed": 123,
    "synth": {"letters": 4, "fps": 30.0},
    "train": {"epochs": 42, "weights": [1, 2, 3, 4]},
    "metrics": {"lve_aggregation": "mean"}
  })");
  RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.seed == 123);
  CHECK(back.synth.letters == 4);
  CHECK(back.synth.fps == 30.0);
  CHECK(back.train.epochs == 42);
  CHECK(back.train.weights.lat == 3.0);
  CHECK(back.metrics.lve_agg == LveAggregation::MeanThenMean);
}
