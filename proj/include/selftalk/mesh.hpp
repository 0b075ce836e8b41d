// mesh.hpp — face template, per-frame vertex offset sequences, and their
// on-disk formats (OBJ, MSEQ, JSON region sidecars).
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selftalk/audio.hpp"
#include "selftalk/mat.hpp"

namespace selftalk {

struct FaceMesh {
  Mat vertices;  // V x 3 positions
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::map<std::string, std::vector<std::size_t>> regions;  // name -> sorted unique indices

  std::size_t vertex_count() const { return vertices.rows; }
  bool has_region(const std::string& name) const { return regions.count(name) != 0; }
  const std::vector<std::size_t>& region(const std::string& name) const;
  // Flattened column indices (3v, 3v+1, 3v+2 per region vertex) into a T x 3V
  // offset matrix.
  std::vector<std::size_t> region_columns(const std::string& name) const;
  void validate() const;
};

// Per-frame offsets over a template, flattened T x 3V (vertex-major xyz).
struct VertexSequence {
  Mat offsets;
  double fps = 0.0;

  std::size_t frames() const { return offsets.rows; }
  std::size_t vertex_count() const { return offsets.cols / 3; }
  double at(std::size_t t, std::size_t v, std::size_t axis) const {
    return offsets.at(t, 3 * v + axis);
  }
  double& at(std::size_t t, std::size_t v, std::size_t axis) {
    return offsets.at(t, 3 * v + axis);
  }
  void validate() const;
};

// OBJ (v/f records, triangulated on load).
FaceMesh load_obj(const std::string& path);
void save_obj(const FaceMesh& mesh, const std::string& path);

// Region sidecars: every `<name>.json` in the directory holds a JSON array of
// vertex indices.
std::map<std::string, std::vector<std::size_t>> load_regions(const std::string& dir);
void save_region(const std::vector<std::size_t>& indices, const std::string& path);

// Template = OBJ or single-frame MSEQ, plus validated region sidecars.
// Requires a "lips" region.
FaceMesh load_template(const std::string& mesh_path, const std::string& regions_dir);

// MSEQ: "MSEQ" | version u32 LE | T u32 | V u32 | fps f32 | T*V*3 f32 row-major.
VertexSequence load_vertex_sequence(const std::string& path);
void save_vertex_sequence(const VertexSequence& seq, const std::string& path);

// Resamples to round(audio duration * fps) frames, endpoint-inclusive linear
// interpolation; single-frame input is held constant.
VertexSequence align_to_fps(const VertexSequence& gt, const AudioClip& audio, double fps);

}  // namespace selftalk
