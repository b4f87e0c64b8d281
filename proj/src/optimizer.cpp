#include "epls/optimizer.hpp"

#include <string>

#include "epls/model.hpp"

namespace epls {

Array flatten_gradient(const GradientPair& grads) {
  const Index nw = grads.d_weights.size();
  const Index nb = grads.d_bias.size();
  Array flat(nw + nb);
  flat.head(nw) = Eigen::Map<const Array>(grads.d_weights.data(), nw);
  flat.tail(nb) = grads.d_bias.array();
  return flat;
}

Array flatten_params(const ModelParams& params) {
  const Index nw = params.weights.size();
  const Index nb = params.bias.size();
  Array flat(nw + nb);
  flat.head(nw) = Eigen::Map<const Array>(params.weights.data(), nw);
  flat.tail(nb) = params.bias.array();
  return flat;
}

void unflatten_params(const Array& theta, ModelParams& params) {
  const Index nw = params.weights.size();
  const Index nb = params.bias.size();
  require(theta.size() == nw + nb, "unflatten_params: size mismatch");
  Eigen::Map<Array>(params.weights.data(), nw) = theta.head(nw);
  params.bias.array() = theta.tail(nb);
}

OptimizerState optimizer_init(Index input_dim, Index output_dim, OptimizerOptions options) {
  if (options.bootstrap_batches < 2) {
    throw ConfigError("optimizer_init: bootstrap_batches must be >= 2");
  }
  OptimizerState state;
  state.options = options;
  state.weight_count = input_dim * output_dim;
  state.bias_count = output_dim;
  if (options.kind == OptimizerKind::AdaptiveVsgd) {
    const Index n = state.weight_count + state.bias_count;
    state.g_avg = Array::Zero(n);
    state.v_avg = Array::Zero(n);
    state.h_avg = Array::Zero(n);
    state.tau = Array::Zero(n);
    state.bootstrap_remaining = options.bootstrap_batches;
  }
  return state;
}

namespace {

void apply_step(ModelParams& params, const Array& step) {
  const Index nw = params.weights.size();
  Eigen::Map<Array>(params.weights.data(), nw) -= step.head(nw);
  params.bias.array() -= step.tail(params.bias.size());
}

}  // namespace

void estimate_rates_and_step(OptimizerState& state, ModelParams& params,
                             const GradientPair& grads, const Array& curvature) {
  require(grads.d_weights.size() == state.weight_count && grads.d_bias.size() == state.bias_count,
          "estimate_rates_and_step: gradient shape mismatch");
  const Array g = flatten_gradient(grads);
  if (!g.isFinite().all()) {
    throw NumericError("estimate_rates_and_step: non-finite gradient entries");
  }

  if (state.options.kind == OptimizerKind::FixedRate) {
    apply_step(params, state.options.fixed_rate * g);
    return;
  }

  require(curvature.size() == g.size(), "estimate_rates_and_step: curvature size mismatch");
  const Scalar floor = state.options.curvature_floor;

  if (state.bootstrap_remaining > 0) {
    state.g_avg += g;
    state.v_avg += g.square();
    state.h_avg += curvature.max(floor);
    state.bootstrap_remaining -= 1;
    if (state.bootstrap_remaining == 0) {
      const Scalar n = static_cast<Scalar>(state.options.bootstrap_batches);
      state.g_avg /= n;
      state.v_avg /= n;
      state.h_avg /= n;
      state.tau.setConstant(n);
    }
    return;  // conservative rate 0 while bootstrapping
  }

  const Array lambda = state.tau.inverse();
  state.g_avg = (1.0 - lambda) * state.g_avg + lambda * g;
  state.v_avg = (1.0 - lambda) * state.v_avg + lambda * g.square();
  state.h_avg = (1.0 - lambda) * state.h_avg + lambda * curvature.max(floor);

  const Array g_sq = state.g_avg.square();
  const Array rate = (state.v_avg > 0.0)
                         .select(g_sq / (state.h_avg * state.v_avg), Array::Zero(g.size()))
                         .min(state.options.rate_ceiling)
                         .max(0.0);
  const Array signal_ratio =
      (state.v_avg > 0.0).select(g_sq / state.v_avg, Array::Zero(g.size()));
  state.tau = (state.tau * (1.0 - signal_ratio) + 1.0).max(1.0);

  apply_step(params, rate * g);
}

Array finite_difference_curvature(const Array& theta, const Array& grad_at_theta,
                                  const std::function<Array(const Array&)>& grad_fn,
                                  std::mt19937_64& rng, Scalar floor) {
  require(theta.size() == grad_at_theta.size(), "finite_difference_curvature: size mismatch");
  Array delta(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    const Scalar sign = (rng() & 1u) ? 1.0 : -1.0;
    delta(i) = sign * 1e-4 * (1.0 + std::abs(theta(i)));
  }
  const Array perturbed_grad = grad_fn(theta + delta);
  require(perturbed_grad.size() == theta.size(), "finite_difference_curvature: grad_fn size mismatch");
  return ((perturbed_grad - grad_at_theta) / delta).abs().max(floor);
}

Array estimate_curvature(const ModelParams& params, const MatrixRef& batch,
                         const MatrixRef& target, const GradientPair& grads,
                         std::mt19937_64& rng, Scalar floor) {
  const Array theta = flatten_params(params);
  ModelParams scratch = params;
  auto grad_fn = [&](const Array& point) {
    unflatten_params(point, scratch);
    Matrix output = forward(batch, scratch);
    error_signal_in_place(output, target);
    GradientPair g;
    g.d_weights.noalias() = batch.transpose() * output;
    g.d_bias = output.colwise().sum();
    return flatten_gradient(g);
  };
  return finite_difference_curvature(theta, flatten_gradient(grads), grad_fn, rng, floor);
}

}  // namespace epls
