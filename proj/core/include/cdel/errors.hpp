#pragma once

#include <stdexcept>
#include <string>

namespace cdel {

// Each kind maps onto one CLI exit status (see pipeline.hpp).
enum class ErrorKind { config, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed configuration or an out-of-range parameter (k > n, t <= 0, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

// Bad input data: schema/format violations, inconsistent ids, dimension mismatches,
// degenerate inputs for which a quantity is undefined.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

// Non-finite arithmetic or solver failure.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

}  // namespace cdel
