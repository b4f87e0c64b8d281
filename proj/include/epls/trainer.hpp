#ifndef EPLS_TRAINER_HPP
#define EPLS_TRAINER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "epls/model.hpp"
#include "epls/optimizer.hpp"
#include "epls/target.hpp"
#include "epls/types.hpp"

namespace epls {

enum class StopReason { Converged, MaxEpochs };

struct TrainConfig {
  Index output_dim = 0;   // N_h, required
  Index batch_size = 0;   // 0 means output_dim
  std::uint64_t seed = 42;
  Scalar stop_rel_tol = 1e-6;
  int max_epochs = 500;
  InhibitorMode inhibitor_mode = InhibitorMode::SoftPaper;
  OptimizerOptions optimizer;
  Scalar epsilon = 1e-6;
  NormMode norm_mode = NormMode::Clip;
  bool verbose = false;

  Index effective_batch() const { return batch_size > 0 ? batch_size : output_dim; }
};

struct TrainReport {
  std::vector<Scalar> epoch_loss;  // sum of batch losses, computed before updates
  std::vector<std::vector<std::int64_t>> epoch_histogram;
  int epochs_run = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
  // High-water mark of matrix/vector elements held simultaneously by the
  // training loop, optimizer state included.
  std::int64_t peak_matrix_elements = 0;
};

// True when the relative decrement |prev - cur| / prev is below tol.
// prev == 0 counts as converged.
bool stop_check(Scalar prev_loss, Scalar cur_loss, Scalar tol);

// Full training procedure: seeded shuffle per epoch, inhibitor reset,
// mini-batch loop (forward, target generation, gradient, adaptive step),
// unit-norm limiting, relative-decrement stop. Leftover samples beyond
// floor(N / batch) are skipped each epoch; re-shuffling covers them across
// epochs. Deterministic given (data, config).
std::pair<ModelParams, TrainReport> train(const MatrixRef& data, const TrainConfig& config);

}  // namespace epls

#endif
