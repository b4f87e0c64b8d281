#ifndef EPLS_MODEL_HPP
#define EPLS_MODEL_HPP

#include <cmath>
#include <cstdint>

#include "epls/types.hpp"

namespace epls {

// Stable logistic: never exponentiates a positive argument.
inline Scalar logistic(Scalar x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (1.0 + e);
}

enum class NormMode {
  Clip,       // rescale only columns whose norm exceeds 1
  Normalize,  // rescale every nonzero column to norm 1
};

// H = f(D W + b), applied row-wise; f is the logistic non-linearity.
Matrix forward(const MatrixRef& data, const ModelParams& params);

// Sum of squared differences over all entries.
Scalar l2_loss(const MatrixRef& output, const MatrixRef& target);

// Overwrites `output` with 2 (H - T) .* H .* (1 - H), the backpropagated
// error of the L2 loss through the logistic, taking the target as constant.
void error_signal_in_place(Matrix& output, const MatrixRef& target);

// dW = D^T S, db = column sums of S, with S the error signal above.
GradientPair gradient(const MatrixRef& data, const MatrixRef& output, const MatrixRef& target);

void limit_unit_norm_in_place(ModelParams& params, NormMode mode = NormMode::Clip);
ModelParams limit_unit_norm(ModelParams params, NormMode mode = NormMode::Clip);

// Weights uniform in [-1/sqrt(input_dim), +1/sqrt(input_dim)], bias zero.
ModelParams init_params(Index input_dim, Index output_dim, std::uint64_t seed);

}  // namespace epls

#endif
