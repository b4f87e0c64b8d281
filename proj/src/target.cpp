#include "epls/target.hpp"

#include <limits>
#include <string>

namespace epls {

InhibitorState new_inhibitor(std::int64_t total_samples, Index output_dim, Scalar epsilon,
                             InhibitorMode mode) {
  if (output_dim < 1) throw ConfigError("new_inhibitor: output_dim must be >= 1");
  if (total_samples < output_dim) {
    throw ConfigError("new_inhibitor: total samples (" + std::to_string(total_samples) +
                      ") must be >= output_dim (" + std::to_string(output_dim) + ")");
  }
  if (!(epsilon > 0.0)) throw ConfigError("new_inhibitor: epsilon must be > 0");
  InhibitorState state;
  state.inhibition = Vector::Zero(output_dim);
  state.selection_counts.setZero(output_dim);
  state.epsilon = epsilon;
  state.increment = static_cast<Scalar>(output_dim) / static_cast<Scalar>(total_samples) + epsilon;
  state.cap = (total_samples + output_dim - 1) / output_dim;
  state.mode = mode;
  state.total_samples = total_samples;
  return state;
}

namespace {

Index argmax_row(const MatrixRef& output, Index row, const InhibitorState& state, bool restrict_cap) {
  Index best = -1;
  Scalar best_score = -std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < output.cols(); ++j) {
    if (restrict_cap && state.selection_counts(j) >= state.cap) continue;
    const Scalar score = output(row, j) - state.inhibition(j);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

}  // namespace

TargetAssignment generate_target(const MatrixRef& output, InhibitorState& state) {
  require(output.cols() == state.inhibition.size(),
          "generate_target: output has " + std::to_string(output.cols()) +
              " columns, inhibitor expects " + std::to_string(state.inhibition.size()));
  TargetAssignment assignment;
  assignment.winners.reserve(static_cast<std::size_t>(output.rows()));
  const bool strict = state.mode == InhibitorMode::StrictCap;
  for (Index n = 0; n < output.rows(); ++n) {
    Index winner = strict ? argmax_row(output, n, state, true) : -1;
    if (winner < 0) winner = argmax_row(output, n, state, false);
    assignment.winners.push_back(winner);
    // inhibition stays exactly counts * increment
    state.selection_counts(winner) += 1;
    state.inhibition(winner) = static_cast<Scalar>(state.selection_counts(winner)) * state.increment;
  }
  return assignment;
}

Matrix remap_target(const TargetAssignment& assignment, Index output_dim,
                    ActivationKind activation) {
  const Index rows = static_cast<Index>(assignment.winners.size());
  Matrix target = Matrix::Constant(rows, output_dim, inactive_value(activation));
  const Scalar active = active_value(activation);
  for (Index n = 0; n < rows; ++n) {
    const Index k = assignment.winners[static_cast<std::size_t>(n)];
    if (k < 0 || k >= output_dim) throw std::out_of_range("remap_target: winner index out of range");
    target(n, k) = active;
  }
  return target;
}

}  // namespace epls
