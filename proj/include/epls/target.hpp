#ifndef EPLS_TARGET_HPP
#define EPLS_TARGET_HPP

#include <cstdint>
#include <vector>

#include "epls/types.hpp"

namespace epls {

enum class InhibitorMode {
  // The accumulator alone discourages re-selection past the cap; faithful to
  // the base algorithm.
  SoftPaper,
  // Outputs already selected ceil(N / N_h) times are excluded from the argmax,
  // guaranteeing exact lifetime balance over an epoch.
  StrictCap,
};

// Per-output inhibition accumulator. Each selection of output j charges it
// N_h/N + epsilon, so after N/N_h selections its score handicap exceeds the
// whole activation range and other outputs win.
struct InhibitorState {
  Vector inhibition;  // = selection_counts * increment, exactly, at all times
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> selection_counts;
  Scalar increment = 0.0;  // N_h/N + epsilon
  Scalar epsilon = 0.0;
  std::int64_t cap = 0;  // ceil(N / N_h)
  InhibitorMode mode = InhibitorMode::SoftPaper;
  std::int64_t total_samples = 0;  // N
};

// Compact one-hot target: one winning output index per batch row.
struct TargetAssignment {
  std::vector<Index> winners;
};

InhibitorState new_inhibitor(std::int64_t total_samples, Index output_dim,
                             Scalar epsilon = 1e-6,
                             InhibitorMode mode = InhibitorMode::SoftPaper);

// Processes rows strictly in order: winner = argmax_j (H(n,j) - a(j)), ties
// to the lowest index, then charges the winner's accumulator. Mutates
// `state`; must not be parallelized across rows.
TargetAssignment generate_target(const MatrixRef& output, InhibitorState& state);

Matrix remap_target(const TargetAssignment& assignment, Index output_dim,
                    ActivationKind activation);

}  // namespace epls

#endif
