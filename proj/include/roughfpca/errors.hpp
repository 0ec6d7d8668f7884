#pragma once

#include <stdexcept>
#include <string>

namespace roughfpca {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind { Config, Numeric, Data };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid parameters, schema violations, arguments outside a function's domain.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DomainError : public ConfigError {
 public:
  explicit DomainError(const std::string& what) : ConfigError(what) {}
};

/// Root finding, calibration or fixed-point iterations that cannot produce an answer.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class NoSolutionError : public NumericError {
 public:
  explicit NoSolutionError(const std::string& what) : NumericError(what) {}
};

class CalibrationError : public NumericError {
 public:
  explicit CalibrationError(const std::string& what) : NumericError(what) {}
};

class IntegrabilityError : public NumericError {
 public:
  explicit IntegrabilityError(const std::string& what) : NumericError(what) {}
};

/// A spike sitting exactly on the criticality threshold.
class BoundaryError : public NumericError {
 public:
  explicit BoundaryError(const std::string& what) : NumericError(what) {}
};

/// Malformed or degenerate input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DegenerateSpectrumError : public DataError {
 public:
  explicit DegenerateSpectrumError(const std::string& what) : DataError(what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Numeric: return 3;
    case ErrorKind::Data: return 4;
  }
  return 1;
}

}  // namespace roughfpca
