#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace etgl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Violated precondition of a public operation (bad shapes, wrong buffer, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numeric update produced or was handed NaN/Inf; the update is not applied.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace etgl
