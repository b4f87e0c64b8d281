#ifndef EPLS_OPTIMIZER_HPP
#define EPLS_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <random>

#include "epls/types.hpp"

namespace epls {

enum class OptimizerKind {
  // Element-wise variance-based rate estimation: eta = g_avg^2 / (h_avg * v_avg)
  // with adaptive memory. No tuning knobs; the constants below are safety
  // floors and ceilings, not meta-parameters.
  AdaptiveVsgd,
  // Plain SGD at a fixed rate, for benchmarks and tests.
  FixedRate,
};

// bootstrap_batches and rate_ceiling are safety constants, not tuning knobs.
// The ceiling bounds the Newton-style step where the finite-difference
// curvature is near zero (the logistic L2 surface is almost flat close to
// saturation; an unbounded rate walks straight into it and the gradient
// dies there).
struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::AdaptiveVsgd;
  Scalar fixed_rate = 0.01;
  int bootstrap_batches = 100;
  Scalar curvature_floor = 1e-12;
  Scalar rate_ceiling = 0.03;
};

// Per-parameter moving averages over the flattened parameter vector
// (weights row-major, then bias).
struct OptimizerState {
  OptimizerOptions options;
  Array g_avg;  // gradient average
  Array v_avg;  // squared-gradient average
  Array h_avg;  // curvature magnitude average, floored positive
  Array tau;    // adaptive memory constants, >= 1
  int bootstrap_remaining = 0;
  Index weight_count = 0;
  Index bias_count = 0;

  bool bootstrapped() const { return bootstrap_remaining == 0; }
};

OptimizerState optimizer_init(Index input_dim, Index output_dim, OptimizerOptions options);

// Applies one mini-batch update in place. During bootstrap the averages
// accumulate and the parameters do not move. Throws NumericError on
// non-finite gradient entries.
void estimate_rates_and_step(OptimizerState& state, ModelParams& params,
                             const GradientPair& grads, const Array& curvature);

// |delta g / delta theta| entrywise at a random sign perturbation of size
// 1e-4 (1 + |theta|), floored strictly positive.
Array finite_difference_curvature(const Array& theta, const Array& grad_at_theta,
                                  const std::function<Array(const Array&)>& grad_fn,
                                  std::mt19937_64& rng, Scalar floor = 1e-12);

// Curvature of the L2-to-target loss for one batch, via the finite-difference
// scheme above with the model gradient. The RNG supplies the perturbation
// signs; callers own it so runs stay reproducible.
Array estimate_curvature(const ModelParams& params, const MatrixRef& batch,
                         const MatrixRef& target, const GradientPair& grads,
                         std::mt19937_64& rng, Scalar floor = 1e-12);

Array flatten_gradient(const GradientPair& grads);
Array flatten_params(const ModelParams& params);
void unflatten_params(const Array& theta, ModelParams& params);

}  // namespace epls

#endif
