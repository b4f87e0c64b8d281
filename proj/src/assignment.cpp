#include "epls/assignment.hpp"

#include <limits>
#include <string>

#include "epls/model.hpp"

namespace epls {

std::vector<Index> min_cost_matching(const MatrixRef& cost) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  require(n <= m, "min_cost_matching: needs rows <= cols");
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // 1-indexed potentials; column 0 is the virtual source.
  std::vector<Scalar> row_potential(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Scalar> col_potential(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<Index> matched_row(static_cast<std::size_t>(m) + 1, 0);
  std::vector<Index> path(static_cast<std::size_t>(m) + 1, 0);
  std::vector<Scalar> min_slack(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<char> visited(static_cast<std::size_t>(m) + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    matched_row[0] = i;
    Index j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(visited.begin(), visited.end(), 0);
    do {
      visited[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = matched_row[static_cast<std::size_t>(j0)];
      Scalar delta = inf;
      Index j1 = -1;
      for (Index j = 1; j <= m; ++j) {
        if (visited[static_cast<std::size_t>(j)]) continue;
        const Scalar reduced = cost(i0 - 1, j - 1) - row_potential[static_cast<std::size_t>(i0)] -
                               col_potential[static_cast<std::size_t>(j)];
        if (reduced < min_slack[static_cast<std::size_t>(j)]) {
          min_slack[static_cast<std::size_t>(j)] = reduced;
          path[static_cast<std::size_t>(j)] = j0;
        }
        if (min_slack[static_cast<std::size_t>(j)] < delta) {
          delta = min_slack[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (visited[static_cast<std::size_t>(j)]) {
          row_potential[static_cast<std::size_t>(matched_row[static_cast<std::size_t>(j)])] += delta;
          col_potential[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_slack[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (matched_row[static_cast<std::size_t>(j0)] != 0);
    // unwind the augmenting path
    while (j0 != 0) {
      const Index j1 = path[static_cast<std::size_t>(j0)];
      matched_row[static_cast<std::size_t>(j0)] = matched_row[static_cast<std::size_t>(j1)];
      j0 = j1;
    }
  }

  std::vector<Index> row_to_col(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= m; ++j) {
    const Index row = matched_row[static_cast<std::size_t>(j)];
    if (row > 0) row_to_col[static_cast<std::size_t>(row - 1)] = j - 1;
  }
  return row_to_col;
}

namespace {

AssignmentResult finish(const Matrix& output, std::vector<Index> winners) {
  AssignmentResult result;
  result.assignment.winners = std::move(winners);
  result.cost = l2_loss(output, remap_target(result.assignment, output.cols(),
                                             ActivationKind::Logistic));
  return result;
}

}  // namespace

AssignmentResult optimal_assignment(const AssignmentInstance& instance) {
  const Index n = instance.output.rows();
  const Index n_h = instance.output.cols();
  if (n > 64 || n_h > 16) {
    throw ConfigError("optimal_assignment: guarded to rows <= 64, outputs <= 16");
  }
  if (instance.capacity < 1) throw ConfigError("optimal_assignment: capacity must be >= 1");
  const Index slots = instance.capacity * n_h;
  if (slots < n) {
    throw ConfigError("optimal_assignment: capacity * outputs < rows, instance infeasible");
  }

  // Slot s belongs to output s / capacity. Minimizing L2 distance to a
  // one-hot target is equivalent to maximizing the picked activations.
  Matrix cost(n, slots);
  for (Index i = 0; i < n; ++i) {
    for (Index s = 0; s < slots; ++s) {
      cost(i, s) = -instance.output(i, s / instance.capacity);
    }
  }
  const std::vector<Index> matched = min_cost_matching(cost);
  std::vector<Index> winners(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    winners[static_cast<std::size_t>(i)] = matched[static_cast<std::size_t>(i)] / instance.capacity;
  }
  return finish(instance.output, std::move(winners));
}

namespace {

struct BruteState {
  const Matrix& output;
  Index capacity = 0;
  std::vector<Index> remaining;
  std::vector<Index> current;
  std::vector<Index> best;
  Scalar best_sum = -std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> suffix_max;  // upper bound on the achievable tail sum

  void search(Index row, Scalar sum) {
    const Index n = output.rows();
    if (row == n) {
      if (sum > best_sum) {
        best_sum = sum;
        best = current;
      }
      return;
    }
    if (sum + suffix_max[static_cast<std::size_t>(row)] <= best_sum) return;
    for (Index j = 0; j < output.cols(); ++j) {
      if (remaining[static_cast<std::size_t>(j)] == 0) continue;
      remaining[static_cast<std::size_t>(j)] -= 1;
      current[static_cast<std::size_t>(row)] = j;
      search(row + 1, sum + output(row, j));
      remaining[static_cast<std::size_t>(j)] += 1;
    }
  }
};

}  // namespace

AssignmentResult brute_force_assignment(const AssignmentInstance& instance) {
  const Index n = instance.output.rows();
  const Index n_h = instance.output.cols();
  if (n > 8) throw ConfigError("brute_force_assignment: guarded to rows <= 8");
  if (instance.capacity < 1) throw ConfigError("brute_force_assignment: capacity must be >= 1");
  if (instance.capacity * n_h < n) {
    throw ConfigError("brute_force_assignment: capacity * outputs < rows, instance infeasible");
  }

  BruteState state{instance.output};
  state.capacity = instance.capacity;
  state.remaining.assign(static_cast<std::size_t>(n_h), instance.capacity);
  state.current.assign(static_cast<std::size_t>(n), -1);
  state.suffix_max.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (Index row = n - 1; row >= 0; --row) {
    state.suffix_max[static_cast<std::size_t>(row)] =
        state.suffix_max[static_cast<std::size_t>(row) + 1] + instance.output.row(row).maxCoeff();
  }
  state.search(0, 0.0);
  return finish(instance.output, std::move(state.best));
}

}  // namespace epls
