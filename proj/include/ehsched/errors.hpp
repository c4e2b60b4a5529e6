#pragma once

#include <stdexcept>
#include <string>

namespace ehsched {

/// A parameter falls outside the domain of the model.
class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Template graph or instance set is malformed (cycle, dangling reference).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InfeasibleProgram : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The brute-force oracle refuses programs whose enumeration is too large.
class OracleTooLarge : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehsched
