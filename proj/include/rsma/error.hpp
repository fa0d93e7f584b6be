#pragma once

#include <stdexcept>
#include <string>

namespace rsma {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Matrix to be inverted is (numerically) rank deficient.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Zero vectors or matrices where a direction is required.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by the experiment engines when a single drop fails; carries the drop index.
class NumericalError : public Error {
 public:
  NumericalError(long long drop_index, const std::string& what)
      : Error("drop " + std::to_string(drop_index) + ": " + what), drop_index_(drop_index) {}

  long long drop_index() const noexcept { return drop_index_; }

 private:
  long long drop_index_;
};

}  // namespace rsma
