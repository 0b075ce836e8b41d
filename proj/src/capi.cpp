#include "selftalk.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "selftalk/commands.hpp"
#include "selftalk/errors.hpp"
#include "selftalk/mesh.hpp"

struct st_mesh {
  selftalk::FaceMesh mesh;
};

struct st_sequence {
  selftalk::VertexSequence sequence;
};

namespace {

thread_local std::string g_last_error;

st_status fail(st_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
st_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ST_OK;
  } catch (const selftalk::InvalidArgument& e) {
    return fail(ST_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const selftalk::IoError& e) {
    return fail(ST_ERROR_IO, e.what());
  } catch (const selftalk::FormatError& e) {
    return fail(ST_ERROR_FORMAT, e.what());
  } catch (const selftalk::MismatchError& e) {
    return fail(ST_ERROR_MISMATCH, e.what());
  } catch (const selftalk::BackendError& e) {
    return fail(ST_ERROR_BACKEND, e.what());
  } catch (const std::exception& e) {
    return fail(ST_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(ST_ERROR_INTERNAL, "unknown error");
  }
}

st_status require(bool ok, const char* message) {
  return ok ? ST_OK : fail(ST_ERROR_INVALID_ARGUMENT, message);
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

std::string or_empty(const char* text) { return text ? std::string(text) : std::string(); }

selftalk::RunConfig parse_config(const char* config_path, const char* overrides_json) {
  return selftalk::load_run_config(or_empty(config_path), or_empty(overrides_json));
}

}  // namespace

extern "C" {

const char* st_status_name(st_status status) {
  switch (status) {
    case ST_OK: return "ok";
    case ST_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case ST_ERROR_IO: return "io error";
    case ST_ERROR_FORMAT: return "format error";
    case ST_ERROR_MISMATCH: return "mismatch";
    case ST_ERROR_BACKEND: return "backend error";
    case ST_ERROR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* st_last_error(void) { return g_last_error.c_str(); }

const char* st_version(void) { return "0.1.0"; }

void st_string_free(char* text) { delete[] text; }

st_status st_mesh_load(const char* mesh_path, const char* regions_dir, st_mesh** out_mesh) {
  if (st_status s = require(mesh_path && regions_dir && out_mesh, "st_mesh_load: null argument");
      s != ST_OK)
    return s;
  *out_mesh = nullptr;
  return guarded([&] {
    auto* handle = new st_mesh{selftalk::load_template(mesh_path, regions_dir)};
    *out_mesh = handle;
  });
}

void st_mesh_free(st_mesh* mesh) { delete mesh; }

st_status st_mesh_info(const st_mesh* mesh, uint32_t* out_vertices, uint32_t* out_faces) {
  if (st_status s = require(mesh != nullptr, "st_mesh_info: null mesh"); s != ST_OK) return s;
  if (out_vertices) *out_vertices = static_cast<uint32_t>(mesh->mesh.vertex_count());
  if (out_faces) *out_faces = static_cast<uint32_t>(mesh->mesh.faces.size());
  g_last_error.clear();
  return ST_OK;
}

st_status st_mesh_region_size(const st_mesh* mesh, const char* region, uint32_t* out_size) {
  if (st_status s = require(mesh && region && out_size, "st_mesh_region_size: null argument");
      s != ST_OK)
    return s;
  return guarded([&] { *out_size = static_cast<uint32_t>(mesh->mesh.region(region).size()); });
}

st_status st_sequence_load(const char* path, st_sequence** out_sequence) {
  if (st_status s = require(path && out_sequence, "st_sequence_load: null argument"); s != ST_OK)
    return s;
  *out_sequence = nullptr;
  return guarded([&] {
    auto* handle = new st_sequence{selftalk::load_vertex_sequence(path)};
    *out_sequence = handle;
  });
}

st_status st_sequence_save(const st_sequence* sequence, const char* path) {
  if (st_status s = require(sequence && path, "st_sequence_save: null argument"); s != ST_OK)
    return s;
  return guarded([&] { selftalk::save_vertex_sequence(sequence->sequence, path); });
}

st_status st_sequence_info(const st_sequence* sequence, uint32_t* out_frames,
                           uint32_t* out_vertices, float* out_fps) {
  if (st_status s = require(sequence != nullptr, "st_sequence_info: null sequence"); s != ST_OK)
    return s;
  if (out_frames) *out_frames = static_cast<uint32_t>(sequence->sequence.frames());
  if (out_vertices) *out_vertices = static_cast<uint32_t>(sequence->sequence.vertex_count());
  if (out_fps) *out_fps = static_cast<float>(sequence->sequence.fps);
  g_last_error.clear();
  return ST_OK;
}

void st_sequence_free(st_sequence* sequence) { delete sequence; }

st_status st_synth(const char* config_path, const char* overrides_json, const char* out_dir) {
  if (st_status s = require(out_dir != nullptr, "st_synth: null out_dir"); s != ST_OK) return s;
  return guarded([&] { selftalk::cmd_synth(parse_config(config_path, overrides_json), out_dir); });
}

st_status st_train(const char* config_path, const char* overrides_json, const char* corpus_dir,
                   const char* out_dir) {
  if (st_status s = require(corpus_dir && out_dir, "st_train: null directory"); s != ST_OK)
    return s;
  return guarded([&] {
    selftalk::cmd_train(parse_config(config_path, overrides_json), corpus_dir, out_dir);
  });
}

st_status st_infer(const char* config_path, const char* overrides_json,
                   const char* checkpoint_dir, const char* wav_path, const char* mesh_path,
                   const char* regions_dir, const char* out_mseq, char** out_transcripts_json) {
  if (st_status s = require(checkpoint_dir && wav_path && mesh_path && regions_dir && out_mseq,
                            "st_infer: null argument");
      s != ST_OK)
    return s;
  return guarded([&] {
    selftalk::InferResult result =
        selftalk::cmd_infer(parse_config(config_path, overrides_json), checkpoint_dir, wav_path,
                            mesh_path, regions_dir, out_mseq);
    if (out_transcripts_json) {
      nlohmann::json j;
      j["lipread"] = result.lipread_transcript;
      j["recognized"] = result.recognized_transcript;
      j["frames"] = result.frames;
      *out_transcripts_json = copy_string(j.dump());
    }
  });
}

st_status st_eval(const char* config_path, const char* overrides_json, const char* gt_dir,
                  const char* pred_dir, const char* mesh_path, const char* regions_dir,
                  const char* out_dir, char** out_summary_json) {
  if (st_status s = require(gt_dir && pred_dir && mesh_path && regions_dir && out_dir,
                            "st_eval: null argument");
      s != ST_OK)
    return s;
  return guarded([&] {
    selftalk::EvalReport report =
        selftalk::cmd_eval(parse_config(config_path, overrides_json), gt_dir, pred_dir, mesh_path,
                           regions_dir, out_dir);
    if (out_summary_json) {
      nlohmann::json j;
      j["lve"] = report.lve;
      j["fdd"] = report.fdd;
      j["lrp"] = report.lrp;
      j["mu"] = report.mu;
      j["lve_aggregation"] = report.lve_aggregation;
      j["samples"] = report.per_sample.size();
      *out_summary_json = copy_string(j.dump());
    }
  });
}

st_status st_export(const char* mseq_path, const char* mesh_path, const char* regions_dir,
                    const char* out_dir, const char* format) {
  if (st_status s = require(mseq_path && mesh_path && regions_dir && out_dir && format,
                            "st_export: null argument");
      s != ST_OK)
    return s;
  return guarded(
      [&] { selftalk::cmd_export(mseq_path, mesh_path, regions_dir, out_dir, format); });
}

}  // extern "C"
