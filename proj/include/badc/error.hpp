#pragma once

#include <stdexcept>
#include <string>

namespace badc {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A level mask with fewer than two kept levels.
class DegenerateMask : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StratificationError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

// Config schema violation; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace badc
