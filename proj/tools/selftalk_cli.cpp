// selftalk_cli.cpp — operator front end; every command goes through the C API
// in selftalk.h. SELFTALK_DATA_DIR provides path defaults.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selftalk.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonFlags {
  std::string config;
  std::string seed;
  std::string mu;
  std::string lve_agg;
  std::string epochs;
  std::string weights;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON config file");
  cmd->add_option("--seed", flags.seed, "master seed (overrides the config file)");
  cmd->add_option("--mu", flags.mu, "LRP threshold in mesh units");
  cmd->add_option("--lve-agg", flags.lve_agg, "LVE aggregation: max or mean")
      ->check(CLI::IsMember({"max", "mean"}));
  cmd->add_option("--epochs", flags.epochs, "training epochs");
  cmd->add_option("--weights", flags.weights, "loss weights l1,l2,l3,l4");
}

// Flags win over config-file values; only explicitly set flags are emitted.
std::string overrides_json(const CommonFlags& flags) {
  json j = json::object();
  if (!flags.seed.empty()) j["seed"] = std::stoull(flags.seed);
  if (!flags.mu.empty()) {
    j["metrics"]["mu"] = std::stod(flags.mu);
    j["train"]["metric_mu"] = std::stod(flags.mu);
  }
  if (!flags.lve_agg.empty()) j["metrics"]["lve_aggregation"] = flags.lve_agg;
  if (!flags.epochs.empty()) j["train"]["epochs"] = std::stoull(flags.epochs);
  if (!flags.weights.empty()) {
    std::vector<double> values;
    std::string rest = flags.weights;
    std::size_t pos = 0;
    while ((pos = rest.find(',')) != std::string::npos) {
      values.push_back(std::stod(rest.substr(0, pos)));
      rest.erase(0, pos + 1);
    }
    values.push_back(std::stod(rest));
    if (values.size() != 4) throw CLI::ValidationError("--weights needs four comma-separated values");
    j["train"]["weights"] = values;
  }
  return j.empty() ? std::string() : j.dump();
}

std::string data_dir() {
  if (const char* env = std::getenv("SELFTALK_DATA_DIR")) return env;
  return ".";
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int report(st_status status) {
  if (status == ST_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", st_status_name(status), st_last_error());
  return 1;
}

std::string default_regions(const std::string& mesh_path) {
  return (fs::path(mesh_path).parent_path() / "regions").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selftalk: speech-driven 3D facial animation with lip-reading supervision"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  CommonFlags synth_flags;
  std::string synth_out = (fs::path(data_dir()) / "corpus").string();
  add_common(synth, synth_flags);
  synth->add_option("--out", synth_out, "output corpus directory");

  // train
  auto* train = app.add_subcommand("train", "train animator and lip reader on a corpus");
  CommonFlags train_flags;
  std::string train_corpus = (fs::path(data_dir()) / "corpus").string();
  std::string train_out = (fs::path(data_dir()) / "run").string();
  add_common(train, train_flags);
  train->add_option("--corpus", train_corpus, "corpus directory");
  train->add_option("--out", train_out, "output run directory");

  // infer
  auto* infer = app.add_subcommand("infer", "drive a template mesh from a WAV file");
  CommonFlags infer_flags;
  std::string infer_ckpt, infer_wav, infer_mesh, infer_regions, infer_out;
  add_common(infer, infer_flags);
  infer->add_option("checkpoint", infer_ckpt, "checkpoint directory")->required();
  infer->add_option("audio", infer_wav, "input WAV file")->required();
  infer->add_option("template", infer_mesh, "template mesh (OBJ or 1-frame MSEQ)")->required();
  infer->add_option("out", infer_out, "output MSEQ path")->required();
  infer->add_option("--regions", infer_regions, "region sidecar directory");

  // eval
  auto* eval = app.add_subcommand("eval", "compute LVE/FDD/LRP over paired MSEQ directories");
  CommonFlags eval_flags;
  std::string eval_gt, eval_pred, eval_mesh, eval_regions;
  std::string eval_out = (fs::path(data_dir()) / "eval").string();
  add_common(eval, eval_flags);
  eval->add_option("gt", eval_gt, "ground-truth MSEQ directory")->required();
  eval->add_option("pred", eval_pred, "prediction MSEQ directory")->required();
  eval->add_option("template", eval_mesh, "template mesh")->required();
  eval->add_option("--regions", eval_regions, "region sidecar directory");
  eval->add_option("--out", eval_out, "report output directory");

  // export
  auto* exp = app.add_subcommand("export", "export a sequence as OBJ frames or an SVG plot");
  std::string exp_seq, exp_mesh, exp_regions, exp_format = "obj";
  std::string exp_out = (fs::path(data_dir()) / "export").string();
  exp->add_option("sequence", exp_seq, "MSEQ file")->required();
  exp->add_option("template", exp_mesh, "template mesh")->required();
  exp->add_option("--regions", exp_regions, "region sidecar directory");
  exp->add_option("--out", exp_out, "output directory");
  exp->add_option("--format", exp_format, "obj or plot")->check(CLI::IsMember({"obj", "plot"}));

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    const std::string ov = overrides_json(synth_flags);
    const int rc = report(st_synth(opt(synth_flags.config), opt(ov), synth_out.c_str()));
    if (rc == 0) std::printf("corpus written to %s\n", synth_out.c_str());
    return rc;
  }

  if (train->parsed()) {
    const std::string ov = overrides_json(train_flags);
    const int rc = report(
        st_train(opt(train_flags.config), opt(ov), train_corpus.c_str(), train_out.c_str()));
    if (rc == 0) std::printf("checkpoints written to %s\n", train_out.c_str());
    return rc;
  }

  if (infer->parsed()) {
    if (infer_regions.empty()) infer_regions = default_regions(infer_mesh);
    const std::string ov = overrides_json(infer_flags);
    char* transcripts = nullptr;
    const int rc = report(st_infer(opt(infer_flags.config), opt(ov), infer_ckpt.c_str(),
                                   infer_wav.c_str(), infer_mesh.c_str(), infer_regions.c_str(),
                                   infer_out.c_str(), &transcripts));
    if (rc == 0 && transcripts) {
      const json j = json::parse(transcripts);
      std::printf("lip-read:   %s\n", j.at("lipread").get<std::string>().c_str());
      std::printf("recognized: %s\n", j.at("recognized").get<std::string>().c_str());
      std::printf("%zu frames written to %s\n",
                  static_cast<std::size_t>(j.at("frames").get<std::uint64_t>()),
                  infer_out.c_str());
    }
    st_string_free(transcripts);
    return rc;
  }

  if (eval->parsed()) {
    if (eval_regions.empty()) eval_regions = default_regions(eval_mesh);
    const std::string ov = overrides_json(eval_flags);
    char* summary = nullptr;
    const int rc =
        report(st_eval(opt(eval_flags.config), opt(ov), eval_gt.c_str(), eval_pred.c_str(),
                       eval_mesh.c_str(), eval_regions.c_str(), eval_out.c_str(), &summary));
    if (rc == 0 && summary) {
      const json j = json::parse(summary);
      std::printf("lve=%.8g fdd=%.8g lrp=%.4f (mu=%g, %s aggregation, %llu samples)\n",
                  j.at("lve").get<double>(), j.at("fdd").get<double>(), j.at("lrp").get<double>(),
                  j.at("mu").get<double>(), j.at("lve_aggregation").get<std::string>().c_str(),
                  static_cast<unsigned long long>(j.at("samples").get<std::uint64_t>()));
      std::printf("report written to %s\n", eval_out.c_str());
    }
    st_string_free(summary);
    return rc;
  }

  if (exp->parsed()) {
    if (exp_regions.empty()) exp_regions = default_regions(exp_mesh);
    const int rc = report(st_export(exp_seq.c_str(), exp_mesh.c_str(), exp_regions.c_str(),
                                    exp_out.c_str(), exp_format.c_str()));
    if (rc == 0) std::printf("export written to %s\n", exp_out.c_str());
    return rc;
  }

  return 0;
}
