#include "epls/model.hpp"

#include <string>

#include "epls/rng.hpp"

namespace epls {

Matrix forward(const MatrixRef& data, const ModelParams& params) {
  require(data.cols() == params.weights.rows(),
          "forward: data has " + std::to_string(data.cols()) + " columns, weights expect " +
              std::to_string(params.weights.rows()));
  require(params.weights.cols() == params.bias.size(), "forward: weights/bias dimension mismatch");
  Matrix out(data.rows(), params.weights.cols());
  out.noalias() = data * params.weights;
  out.rowwise() += params.bias.transpose();
  return out.unaryExpr([](Scalar x) { return logistic(x); });
}

Scalar l2_loss(const MatrixRef& output, const MatrixRef& target) {
  require(output.rows() == target.rows() && output.cols() == target.cols(),
          "l2_loss: shape mismatch");
  return (output - target).squaredNorm();
}

void error_signal_in_place(Matrix& output, const MatrixRef& target) {
  require(output.rows() == target.rows() && output.cols() == target.cols(),
          "error_signal: shape mismatch");
  output.array() = 2.0 * (output.array() - target.array()) * output.array() * (1.0 - output.array());
}

GradientPair gradient(const MatrixRef& data, const MatrixRef& output, const MatrixRef& target) {
  require(data.rows() == output.rows(), "gradient: data/output row mismatch");
  Matrix signal = output;
  error_signal_in_place(signal, target);
  GradientPair grads;
  grads.d_weights.noalias() = data.transpose() * signal;
  grads.d_bias = signal.colwise().sum();
  return grads;
}

void limit_unit_norm_in_place(ModelParams& params, NormMode mode) {
  for (Index j = 0; j < params.weights.cols(); ++j) {
    const Scalar norm = params.weights.col(j).norm();
    if (norm == 0.0) continue;
    if (mode == NormMode::Normalize || norm > 1.0) {
      params.weights.col(j) /= norm;
    }
  }
}

ModelParams limit_unit_norm(ModelParams params, NormMode mode) {
  limit_unit_norm_in_place(params, mode);
  return params;
}

ModelParams init_params(Index input_dim, Index output_dim, std::uint64_t seed) {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("init_params: dimensions must be >= 1");
  ModelParams params;
  params.weights.resize(input_dim, output_dim);
  params.bias = Vector::Zero(output_dim);
  const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(input_dim));
  auto rng = seeded_stream(seed, RngStream::Init);
  for (Index i = 0; i < input_dim; ++i) {
    for (Index j = 0; j < output_dim; ++j) {
      params.weights(i, j) = uniform_in(rng, -scale, scale);
    }
  }
  return params;
}

}  // namespace epls
