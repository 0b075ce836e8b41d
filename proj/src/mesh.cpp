#include "selftalk/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "selftalk/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "MSEQ serialization assumes a little-endian host");

namespace selftalk {

namespace fs = std::filesystem;

const std::vector<std::size_t>& FaceMesh::region(const std::string& name) const {
  auto it = regions.find(name);
  if (it == regions.end()) throw InvalidArgument("mesh: missing region \"" + name + "\"");
  return it->second;
}

std::vector<std::size_t> FaceMesh::region_columns(const std::string& name) const {
  const auto& idx = region(name);
  std::vector<std::size_t> cols;
  cols.reserve(idx.size() * 3);
  for (std::size_t v : idx) {
    cols.push_back(3 * v);
    cols.push_back(3 * v + 1);
    cols.push_back(3 * v + 2);
  }
  return cols;
}

void FaceMesh::validate() const {
  if (vertices.cols != 3) throw FormatError("mesh: vertices must be V x 3");
  if (vertex_count() < 4) throw FormatError("mesh: needs at least 4 vertices");
  if (!vertices.all_finite()) throw FormatError("mesh: non-finite vertex positions");
  for (const auto& f : faces) {
    for (std::uint32_t i : f) {
      if (i >= vertex_count()) throw FormatError("mesh: face index out of range");
    }
  }
  for (const auto& [name, idx] : regions) {
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
      if (idx[i] >= idx[i + 1])
        throw FormatError("mesh: region \"" + name + "\" not sorted unique");
    }
    if (!idx.empty() && idx.back() >= vertex_count())
      throw FormatError("mesh: region \"" + name + "\" index out of range");
  }
}

void VertexSequence::validate() const {
  if (offsets.rows < 1) throw FormatError("sequence: needs at least one frame");
  if (offsets.cols == 0 || offsets.cols % 3 != 0)
    throw FormatError("sequence: column count must be a positive multiple of 3");
  if (!(fps > 0.0)) throw FormatError("sequence: fps must be positive");
  if (!offsets.all_finite()) throw FormatError("sequence: non-finite offsets");
}

FaceMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_obj: cannot open " + path);
  FaceMesh mesh;
  std::vector<double> verts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("v ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw FormatError("load_obj: malformed vertex at line " + std::to_string(line_no));
      verts.push_back(x);
      verts.push_back(y);
      verts.push_back(z);
    } else if (line.rfind("f ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/j", "i/j/k" — the vertex index leads
        long idx = std::strtol(tok.c_str(), nullptr, 10);
        if (idx <= 0)
          throw FormatError("load_obj: unsupported face index at line " + std::to_string(line_no));
        poly.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      if (poly.size() < 3)
        throw FormatError("load_obj: face with fewer than 3 vertices at line " +
                          std::to_string(line_no));
      for (std::size_t i = 2; i < poly.size(); ++i)
        mesh.faces.push_back({poly[0], poly[i - 1], poly[i]});
    }
  }
  if (verts.empty()) throw FormatError("load_obj: no vertices in " + path);
  const std::size_t vertex_count = verts.size() / 3;
  mesh.vertices = Mat(vertex_count, 3, std::move(verts));
  return mesh;
}

void save_obj(const FaceMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_obj: cannot open " + path);
  char buf[96];
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", mesh.vertices.at(v, 0),
                  mesh.vertices.at(v, 1), mesh.vertices.at(v, 2));
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) throw IoError("save_obj: write failed for " + path);
}

std::map<std::string, std::vector<std::size_t>> load_regions(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("load_regions: not a directory: " + dir);
  std::map<std::string, std::vector<std::size_t>> regions;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw FormatError("load_regions: bad JSON in " + file.string() + ": " + e.what());
    }
    if (!j.is_array())
      throw FormatError("load_regions: " + file.string() + " is not a JSON array");
    std::vector<std::size_t> idx;
    for (const auto& item : j) {
      if (!item.is_number_integer() || item.get<long long>() < 0)
        throw FormatError("load_regions: " + file.string() + " holds a non-index value");
      idx.push_back(item.get<std::size_t>());
    }
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i + 1 < idx.size(); ++i)
      if (idx[i] == idx[i + 1])
        throw FormatError("load_regions: duplicate index in " + file.string());
    regions[file.stem().string()] = std::move(idx);
  }
  return regions;
}

void save_region(const std::vector<std::size_t>& indices, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i : indices) j.push_back(i);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_region: cannot open " + path);
  out << j.dump() << '\n';
}

FaceMesh load_template(const std::string& mesh_path, const std::string& regions_dir) {
  FaceMesh mesh;
  const fs::path p(mesh_path);
  if (p.extension() == ".mseq") {
    VertexSequence seq = load_vertex_sequence(mesh_path);
    if (seq.frames() != 1)
      throw FormatError("load_template: MSEQ template must have exactly one frame");
    mesh.vertices = Mat(seq.vertex_count(), 3, seq.offsets.v);
  } else {
    mesh = load_obj(mesh_path);
  }
  mesh.regions = load_regions(regions_dir);
  if (!mesh.has_region("lips"))
    throw FormatError("load_template: missing \"lips\" region in " + regions_dir);
  mesh.validate();
  return mesh;
}

namespace {

constexpr char kMseqMagic[4] = {'M', 'S', 'E', 'Q'};
constexpr std::uint32_t kMseqVersion = 1;

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    throw FormatError(std::string("load_vertex_sequence: truncated payload reading ") + what);
}

}  // namespace

VertexSequence load_vertex_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_vertex_sequence: cannot open " + path);
  char magic[4];
  read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kMseqMagic, 4) != 0)
    throw FormatError("load_vertex_sequence: bad magic in " + path);
  std::uint32_t version = 0, frames = 0, verts = 0;
  float fps = 0.0f;
  read_bytes(in, &version, 4, "version");
  if (version != kMseqVersion)
    throw FormatError("load_vertex_sequence: unsupported version " + std::to_string(version));
  read_bytes(in, &frames, 4, "frame count");
  read_bytes(in, &verts, 4, "vertex count");
  read_bytes(in, &fps, 4, "fps");
  if (frames == 0 || verts == 0)
    throw FormatError("load_vertex_sequence: empty sequence in " + path);
  const std::size_t count = static_cast<std::size_t>(frames) * verts * 3;
  std::vector<float> raw(count);
  read_bytes(in, raw.data(), count * 4, "offsets");
  char extra;
  if (in.read(&extra, 1))
    throw FormatError("load_vertex_sequence: trailing bytes in " + path);

  VertexSequence seq;
  seq.fps = static_cast<double>(fps);
  seq.offsets = Mat(frames, static_cast<std::size_t>(verts) * 3);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(raw[i]))
      throw FormatError("load_vertex_sequence: non-finite offset in " + path);
    seq.offsets.v[i] = static_cast<double>(raw[i]);
  }
  seq.validate();
  return seq;
}

void save_vertex_sequence(const VertexSequence& seq, const std::string& path) {
  seq.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_vertex_sequence: cannot open " + path);
  write_bytes(out, kMseqMagic, 4);
  const std::uint32_t version = kMseqVersion;
  const std::uint32_t frames = static_cast<std::uint32_t>(seq.frames());
  const std::uint32_t verts = static_cast<std::uint32_t>(seq.vertex_count());
  const float fps = static_cast<float>(seq.fps);
  write_bytes(out, &version, 4);
  write_bytes(out, &frames, 4);
  write_bytes(out, &verts, 4);
  write_bytes(out, &fps, 4);
  std::vector<float> raw(seq.offsets.v.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<float>(seq.offsets.v[i]);
  write_bytes(out, raw.data(), raw.size() * 4);
  if (!out) throw IoError("save_vertex_sequence: write failed for " + path);
}

VertexSequence align_to_fps(const VertexSequence& gt, const AudioClip& audio, double fps) {
  if (!(fps > 0.0)) throw InvalidArgument("align_to_fps: fps must be positive");
  gt.validate();
  const auto target =
      static_cast<std::size_t>(std::max<long long>(1, std::llround(audio.duration_seconds() * fps)));
  VertexSequence out;
  out.fps = fps;
  out.offsets = resample_rows(gt.offsets, target);
  return out;
}

}  // namespace selftalk
