#ifndef EPLS_BENCH_HPP
#define EPLS_BENCH_HPP

#include <cstdint>

#include "epls/types.hpp"

namespace epls {

// Wall-times target generation over N rows at two sizes in each dimension;
// the ratios quantify how the cost scales when N or N_h doubles.
struct TargetBenchResult {
  Index samples = 0;
  Index output_dim = 0;
  double seconds_base = 0.0;
  double seconds_double_samples = 0.0;
  double seconds_double_outputs = 0.0;
  double seconds_double_both = 0.0;
  double ratio_samples = 0.0;   // t(2N, N_h) / t(N, N_h)
  double ratio_outputs = 0.0;   // t(N, 2N_h) / t(N, N_h)
  double elements_per_second = 0.0;  // N * N_h / t at the base size
};

TargetBenchResult bench_generate_target(Index samples, Index output_dim, int trials,
                                        std::uint64_t seed = 42);

}  // namespace epls

#endif
