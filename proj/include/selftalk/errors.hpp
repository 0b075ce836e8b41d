// errors.hpp — exception taxonomy shared by the core; the C API maps each
// type to a status code at the boundary.
#pragma once

#include <stdexcept>
#include <string>

namespace selftalk {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidArgument : std::runtime_error {
  explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

struct MismatchError : std::runtime_error {
  explicit MismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BackendError : std::runtime_error {
  explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace selftalk
