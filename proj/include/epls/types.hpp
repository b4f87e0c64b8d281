#ifndef EPLS_TYPES_HPP
#define EPLS_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace epls {

// All internal math is done in 64-bit precision; file containers may narrow
// to 32-bit on request (see io.hpp).
using Scalar = double;

// Row-major storage throughout: rows are samples, columns are outputs/inputs,
// and the file containers serialize exactly this layout.
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

using MatrixRef = Eigen::Ref<const Matrix>;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Extensible activation enumeration; only the logistic is shipped.
enum class ActivationKind : std::uint8_t { Logistic = 0 };

constexpr Scalar active_value(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Logistic:
      return 1.0;
  }
  return 1.0;
}

constexpr Scalar inactive_value(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Logistic:
      return 0.0;
  }
  return 0.0;
}

// The trainable system: one basis per column of W plus a per-output bias.
struct ModelParams {
  Matrix weights;  // input_dim x output_dim
  Vector bias;     // output_dim
  ActivationKind activation = ActivationKind::Logistic;

  Index input_dim() const { return weights.rows(); }
  Index output_dim() const { return weights.cols(); }
};

struct GradientPair {
  Matrix d_weights;
  Vector d_bias;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}

}  // namespace epls

#endif
