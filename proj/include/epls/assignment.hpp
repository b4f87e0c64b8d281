#ifndef EPLS_ASSIGNMENT_HPP
#define EPLS_ASSIGNMENT_HPP

#include <vector>

#include "epls/target.hpp"
#include "epls/types.hpp"

namespace epls {

// Capacity-constrained assignment: choose one output per row so that no
// output is chosen more than `capacity` times, minimizing the L2 distance to
// the resulting one-hot target. Exact solvers, test scale only.
struct AssignmentInstance {
  Matrix output;   // N x N_h
  Index capacity;  // slots per output, ceil(N / N_h) for exact instances
};

struct AssignmentResult {
  TargetAssignment assignment;
  Scalar cost;  // == l2_loss(output, remap_target(assignment)) exactly
};

// Min-cost bipartite matching (successive shortest paths with potentials)
// over cost(i, j), rows <= cols; returns the matched column per row.
std::vector<Index> min_cost_matching(const MatrixRef& cost);

// Expands each output into `capacity` slots and matches rows to slots.
// Guards: rows <= 64, outputs <= 16.
AssignmentResult optimal_assignment(const AssignmentInstance& instance);

// Exhaustive enumeration over capacity-respecting assignments. Guard: rows <= 8.
AssignmentResult brute_force_assignment(const AssignmentInstance& instance);

}  // namespace epls

#endif
