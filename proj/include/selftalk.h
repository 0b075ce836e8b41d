/* selftalk.h — C API for the selftalk shared library.
 *
 * Handles are opaque; every function returns a status code and the last error
 * message is kept per thread (st_last_error). Strings returned through char**
 * are heap-allocated and must be released with st_string_free.
 */
#ifndef SELFTALK_H
#define SELFTALK_H

#include <stdint.h>

#if defined(_WIN32)
#define ST_API __declspec(dllexport)
#else
#define ST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum st_status {
  ST_OK = 0,
  ST_ERROR_INVALID_ARGUMENT = 1,
  ST_ERROR_IO = 2,
  ST_ERROR_FORMAT = 3,
  ST_ERROR_MISMATCH = 4,
  ST_ERROR_BACKEND = 5,
  ST_ERROR_INTERNAL = 6
} st_status;

ST_API const char* st_status_name(st_status status);

/* Message from the most recent failing call on this thread ("" when none). */
ST_API const char* st_last_error(void);

ST_API const char* st_version(void);
ST_API void st_string_free(char* text);

/* ---- handles ---------------------------------------------------------- */

typedef struct st_mesh st_mesh;
typedef struct st_sequence st_sequence;

/* Template mesh (OBJ or single-frame MSEQ) plus region sidecars; the "lips"
 * region is required. */
ST_API st_status st_mesh_load(const char* mesh_path, const char* regions_dir, st_mesh** out_mesh);
ST_API void st_mesh_free(st_mesh* mesh);
ST_API st_status st_mesh_info(const st_mesh* mesh, uint32_t* out_vertices, uint32_t* out_faces);
ST_API st_status st_mesh_region_size(const st_mesh* mesh, const char* region,
                                     uint32_t* out_size);

/* MSEQ offset sequences. */
ST_API st_status st_sequence_load(const char* path, st_sequence** out_sequence);
ST_API st_status st_sequence_save(const st_sequence* sequence, const char* path);
ST_API st_status st_sequence_info(const st_sequence* sequence, uint32_t* out_frames,
                                  uint32_t* out_vertices, float* out_fps);
ST_API void st_sequence_free(st_sequence* sequence);

/* ---- commands ---------------------------------------------------------- *
 * config_path may be NULL (defaults only); overrides_json may be NULL. The
 * overrides object uses the same schema as the config file and wins over it.
 */

ST_API st_status st_synth(const char* config_path, const char* overrides_json,
                          const char* out_dir);

ST_API st_status st_train(const char* config_path, const char* overrides_json,
                          const char* corpus_dir, const char* out_dir);

/* Writes predicted offsets to out_mseq; *out_transcripts_json receives
 * {"lipread": ..., "recognized": ..., "frames": N}. */
ST_API st_status st_infer(const char* config_path, const char* overrides_json,
                          const char* checkpoint_dir, const char* wav_path,
                          const char* mesh_path, const char* regions_dir, const char* out_mseq,
                          char** out_transcripts_json);

/* Writes report.json/report.csv into out_dir; *out_summary_json receives the
 * corpus-level numbers. */
ST_API st_status st_eval(const char* config_path, const char* overrides_json, const char* gt_dir,
                         const char* pred_dir, const char* mesh_path, const char* regions_dir,
                         const char* out_dir, char** out_summary_json);

/* format: "obj" (one OBJ per frame) or "plot" (lip_trajectories.svg). */
ST_API st_status st_export(const char* mseq_path, const char* mesh_path,
                           const char* regions_dir, const char* out_dir, const char* format);

#ifdef __cplusplus
}
#endif

#endif /* SELFTALK_H */
