#include "selftalk/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (in.gcount() != 4) throw FormatError(std::string("parameter archive: truncated ") + what);
  return v;
}

}  // namespace

void save_parameter_archive(const NamedParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_parameter_archive: cannot open " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    write_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(out, static_cast<std::uint32_t>(p.tensor.rows()));
    write_u32(out, static_cast<std::uint32_t>(p.tensor.cols()));
    const auto& values = p.tensor.values();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) throw IoError("save_parameter_archive: write failed for " + path);
}

void load_parameter_archive(NamedParams& params, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_parameter_archive: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("parameter archive: bad magic in " + path);
  const std::uint32_t version = read_u32(in, "version");
  if (version != kVersion)
    throw FormatError("parameter archive: unsupported version " + std::to_string(version));
  const std::uint32_t count = read_u32(in, "count");

  std::map<std::string, Tensor*> by_name;
  for (auto& p : params) by_name[p.name] = &p.tensor;
  std::size_t loaded = 0;

  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(in, "name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (in.gcount() != static_cast<std::streamsize>(name_len))
      throw FormatError("parameter archive: truncated name");
    const std::uint32_t rows = read_u32(in, "rows");
    const std::uint32_t cols = read_u32(in, "cols");
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw MismatchError("parameter archive: unknown parameter \"" + name + "\"");
    Tensor& tensor = *it->second;
    if (tensor.rows() != rows || tensor.cols() != cols)
      throw MismatchError("parameter archive: shape mismatch for \"" + name + "\"");
    in.read(reinterpret_cast<char*>(tensor.values().data()),
            static_cast<std::streamsize>(tensor.values().size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(tensor.values().size() * sizeof(double)))
      throw FormatError("parameter archive: truncated values for \"" + name + "\"");
    ++loaded;
  }
  if (loaded != params.size())
    throw MismatchError("parameter archive: " + path + " is missing parameters");
}

}  // namespace selftalk
