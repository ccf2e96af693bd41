#pragma once

#include <stdexcept>
#include <string>

namespace harmofl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transform size is not a power of two.
struct DimensionError : Error {
  using Error::Error;
};

// NaN/Inf or otherwise unusable numeric input.
struct InputError : Error {
  using Error::Error;
};

// Two grids (or parameter vectors) that must agree in shape do not.
struct ShapeError : Error {
  using Error::Error;
};

// Inverse transform produced a non-negligible imaginary part.
struct SpectralError : Error {
  using Error::Error;
};

// Config file problems; carries the offending line when known.
struct ConfigError : Error {
  int line = 0;
  explicit ConfigError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
};

// Dataset generation or record bookkeeping failures.
struct DataError : Error {
  using Error::Error;
};

}  // namespace harmofl
