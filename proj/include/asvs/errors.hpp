#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace asvs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyper-parameters or configuration files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Phoneme, pitch or singer id outside its vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Durations that do not line up with a phoneme or frame sequence.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Malformed data (labels, targets, files, batches).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Internal contract broken at runtime (e.g. optimizer stepping a parameter
/// that never received a gradient).
class InvariantError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

}  // namespace asvs
