// commands.hpp — the operator-level commands behind the CLI and the C API:
// corpus synthesis, training, inference, evaluation, export.
#pragma once

#include <string>

#include "selftalk/config.hpp"
#include "selftalk/metrics.hpp"
#include "selftalk/text.hpp"

namespace selftalk {

// Writes a synthetic corpus tree (WAV + MSEQ + transcripts + template +
// regions + vocabulary + manifest).
void cmd_synth(const RunConfig& cfg, const std::string& out_dir);

// Trains on a corpus directory; writes ckpt_epoch_<n>/ + ckpt_best under
// out_dir plus run_info.json (wall time lives there, never in the logs).
void cmd_train(const RunConfig& cfg, const std::string& corpus_dir, const std::string& out_dir);

struct InferResult {
  Transcript lipread_transcript;
  Transcript recognized_transcript;
  std::size_t frames = 0;
};

// Rebuilds the models from the checkpoint's config snapshot, writes the
// predicted offsets as MSEQ, and reports both transcripts.
InferResult cmd_infer(const RunConfig& cfg, const std::string& checkpoint_dir,
                      const std::string& wav_path, const std::string& mesh_path,
                      const std::string& regions_dir, const std::string& out_mseq);

// Pairs <id>.mseq files across the two directories and writes report.json and
// report.csv into out_dir.
EvalReport cmd_eval(const RunConfig& cfg, const std::string& gt_dir, const std::string& pred_dir,
                    const std::string& mesh_path, const std::string& regions_dir,
                    const std::string& out_dir);

// format "obj": one OBJ per frame (template + offsets). format "plot": a
// single SVG of lip-vertex offset trajectories, deterministic filename.
void cmd_export(const std::string& mseq_path, const std::string& mesh_path,
                const std::string& regions_dir, const std::string& out_dir,
                const std::string& format);

}  // namespace selftalk
