// checkpoint.hpp — versioned binary archive of named parameter tensors.
// Layout: "STCP" | version u32 LE | count u32 | per tensor:
//   name_len u32 | name bytes | rows u32 | cols u32 | rows*cols f64 LE.
#pragma once

#include <string>

#include "selftalk/layers.hpp"

namespace selftalk {

void save_parameter_archive(const NamedParams& params, const std::string& path);

// Loads values into existing tensors by name. Every archived name must match
// a tensor of identical shape, and every tensor must be present.
void load_parameter_archive(NamedParams& params, const std::string& path);

}  // namespace selftalk
