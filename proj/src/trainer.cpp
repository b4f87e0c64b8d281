#include "epls/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "epls/model.hpp"
#include "epls/rng.hpp"

namespace epls {

bool stop_check(Scalar prev_loss, Scalar cur_loss, Scalar tol) {
  if (prev_loss < 0.0) throw ConfigError("stop_check: prev_loss must be >= 0");
  if (prev_loss == 0.0) return true;
  return std::abs(prev_loss - cur_loss) / prev_loss < tol;
}

namespace {

// Element-count accounting for the matrices the loop holds at once.
struct ElementMeter {
  std::int64_t current = 0;
  std::int64_t peak = 0;

  void add(std::int64_t n) {
    current += n;
    if (current > peak) peak = current;
  }
  void release(std::int64_t n) { current -= n; }
};

struct MeterGuard {
  ElementMeter& meter;
  std::int64_t n;
  MeterGuard(ElementMeter& m, std::int64_t count) : meter(m), n(count) { meter.add(n); }
  ~MeterGuard() { meter.release(n); }
  MeterGuard(const MeterGuard&) = delete;
  MeterGuard& operator=(const MeterGuard&) = delete;
};

std::int64_t optimizer_elements(const OptimizerState& state) {
  return state.g_avg.size() + state.v_avg.size() + state.h_avg.size() + state.tau.size();
}

}  // namespace

std::pair<ModelParams, TrainReport> train(const MatrixRef& data, const TrainConfig& config) {
  const Index n_samples = data.rows();
  const Index n_inputs = data.cols();
  const Index n_outputs = config.output_dim;
  if (n_outputs < 1) throw ConfigError("train: output_dim must be >= 1");
  if (n_samples < n_outputs) {
    throw ConfigError("train: need at least " + std::to_string(n_outputs) + " samples, got " +
                      std::to_string(n_samples));
  }
  const Index batch = config.effective_batch();
  if (batch < 1 || batch > n_samples) throw ConfigError("train: batch size out of range");
  if (!(config.stop_rel_tol > 0.0)) throw ConfigError("train: stop_rel_tol must be > 0");
  if (config.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");

  ModelParams params = init_params(n_inputs, n_outputs, config.seed);
  OptimizerState optimizer = optimizer_init(n_inputs, n_outputs, config.optimizer);
  auto shuffle_rng = seeded_stream(config.seed, RngStream::Shuffle);
  auto curvature_rng = seeded_stream(config.seed, RngStream::Curvature);
  const bool adaptive = config.optimizer.kind == OptimizerKind::AdaptiveVsgd;

  ElementMeter meter;
  meter.add(params.weights.size() + params.bias.size());
  meter.add(optimizer_elements(optimizer));

  std::vector<Index> permutation(static_cast<std::size_t>(n_samples));
  std::iota(permutation.begin(), permutation.end(), Index{0});

  TrainReport report;
  const Index batches_per_epoch = n_samples / batch;
  const std::int64_t param_count = params.weights.size() + params.bias.size();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    fisher_yates(permutation, shuffle_rng);
    InhibitorState inhibitor =
        new_inhibitor(n_samples, n_outputs, config.epsilon, config.inhibitor_mode);
    MeterGuard inhibitor_mem(meter, inhibitor.inhibition.size());

    Scalar epoch_loss = 0.0;
    for (Index b = 0; b < batches_per_epoch; ++b) {
      Matrix batch_data(batch, n_inputs);
      MeterGuard batch_mem(meter, batch_data.size());
      for (Index i = 0; i < batch; ++i) {
        batch_data.row(i) = data.row(permutation[static_cast<std::size_t>(b * batch + i)]);
      }

      Matrix output = forward(batch_data, params);
      meter.add(output.size());
      const TargetAssignment assignment = generate_target(output, inhibitor);
      Matrix target = remap_target(assignment, n_outputs, params.activation);
      MeterGuard target_mem(meter, target.size());

      const Scalar batch_loss = l2_loss(output, target);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(b));
      }
      epoch_loss += batch_loss;

      // the error signal overwrites the output buffer
      error_signal_in_place(output, target);
      GradientPair grads;
      MeterGuard grads_mem(meter, param_count);
      grads.d_weights.noalias() = batch_data.transpose() * output;
      grads.d_bias = output.colwise().sum();
      meter.release(output.size());
      output = Matrix();

      Array curvature;
      if (adaptive) {
        // estimate_curvature holds a parameter copy, a recomputed output
        // block, and a flattened gradient alongside its result
        MeterGuard scratch_mem(meter, 2 * param_count + batch * n_outputs);
        meter.add(param_count);  // curvature result, released after the step
        curvature = estimate_curvature(params, batch_data, target, grads, curvature_rng,
                                       config.optimizer.curvature_floor);
      }
      estimate_rates_and_step(optimizer, params, grads, curvature);
      if (adaptive) meter.release(param_count);
    }

    limit_unit_norm_in_place(params, config.norm_mode);

    report.epoch_loss.push_back(epoch_loss);
    report.epoch_histogram.emplace_back(inhibitor.selection_counts.data(),
                                        inhibitor.selection_counts.data() + n_outputs);
    report.epochs_run = epoch;

    const Scalar prev = epoch >= 2 ? report.epoch_loss[static_cast<std::size_t>(epoch - 2)] : 0.0;
    const Scalar rel =
        epoch >= 2 && prev > 0.0 ? std::abs(prev - epoch_loss) / prev : std::nan("");
    if (config.verbose) {
      const auto& hist = report.epoch_histogram.back();
      const auto [hist_min, hist_max] = std::minmax_element(hist.begin(), hist.end());
      std::fprintf(stderr, "epoch %d loss %.8g rel %.3g hist[min=%lld max=%lld]\n", epoch,
                   epoch_loss, rel, static_cast<long long>(*hist_min),
                   static_cast<long long>(*hist_max));
    }
    if (epoch >= 2 && stop_check(prev, epoch_loss, config.stop_rel_tol)) {
      report.stop_reason = StopReason::Converged;
      break;
    }
    report.stop_reason = StopReason::MaxEpochs;
  }

  report.peak_matrix_elements = meter.peak;
  return {std::move(params), std::move(report)};
}

}  // namespace epls
