#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace tsymp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Raised when a numerical routine cannot produce a meaningful answer
/// (singular boundary system, non-PD weights, shape mismatch).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed configuration input. `field` carries the dotted
/// path of the offending entry, or is empty for syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        message_(message) {}

  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace tsymp
