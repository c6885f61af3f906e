#pragma once

#include <stdexcept>
#include <string>

namespace emvc {

// Numeric argument outside its mathematical domain (x <= 0, gamma <= 1, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Mismatched or invalid dimensions between two objects.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed argument that is not a dimension problem (empty list, bad enum, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Dempster combination where the conflict mass leaves nothing to renormalize.
class ConflictError : public std::runtime_error {
 public:
  explicit ConflictError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation undefined at this point (e.g. opinion with zero uncertainty).
class SingularityError : public std::domain_error {
 public:
  explicit SingularityError(const std::string& msg) : std::domain_error(msg) {}
};

// Requested combination of options exists but is deliberately not provided.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke an API contract (stale cache, params/config mismatch).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Problem reading or interpreting dataset files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A stratified split cannot be formed from the given labels.
class StratificationError : public std::runtime_error {
 public:
  explicit StratificationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace emvc
