#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace upir {

class NotPrimeError : public std::invalid_argument {
 public:
  explicit NotPrimeError(std::uint64_t n)
      : std::invalid_argument("order must be prime, got " + std::to_string(n)) {}
};

class ParameterError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class ResourceLimitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class DivisibilityError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class PartitionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::logic_error {
  using std::logic_error::logic_error;
};

class NoDataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class UnknownQueryError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace upir
