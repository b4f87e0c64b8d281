#include "epls/bench.hpp"

#include <chrono>
#include <limits>

#include "epls/rng.hpp"
#include "epls/target.hpp"

namespace epls {

namespace {

// Streams the sample count through one random block, the way training does;
// the inhibitor carries across calls so the whole epoch is exercised.
double time_epoch(const Matrix& block, Index samples, int trials) {
  const Index block_rows = block.rows();
  double best = std::numeric_limits<double>::max();
  for (int trial = 0; trial < trials; ++trial) {
    InhibitorState state = new_inhibitor(samples, block.cols(), 1e-6, InhibitorMode::SoftPaper);
    const auto start = std::chrono::steady_clock::now();
    Index done = 0;
    while (done < samples) {
      const Index rows = std::min(block_rows, samples - done);
      generate_target(block.topRows(rows), state);
      done += rows;
    }
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

Matrix random_block(Index rows, Index cols, std::mt19937_64& rng) {
  Matrix block(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) block(i, j) = uniform_unit(rng);
  }
  return block;
}

}  // namespace

TargetBenchResult bench_generate_target(Index samples, Index output_dim, int trials,
                                        std::uint64_t seed) {
  if (samples < 1 || output_dim < 1 || trials < 1) {
    throw ConfigError("bench_generate_target: sizes and trials must be positive");
  }
  auto rng = seeded_stream(seed, RngStream::Bench);
  const Index block_rows = std::min<Index>(samples, 1024);
  const Matrix block_narrow = random_block(block_rows, output_dim, rng);
  const Matrix block_wide = random_block(block_rows, 2 * output_dim, rng);

  TargetBenchResult result;
  result.samples = samples;
  result.output_dim = output_dim;
  result.seconds_base = time_epoch(block_narrow, samples, trials);
  result.seconds_double_samples = time_epoch(block_narrow, 2 * samples, trials);
  result.seconds_double_outputs = time_epoch(block_wide, samples, trials);
  result.seconds_double_both = time_epoch(block_wide, 2 * samples, trials);
  result.ratio_samples = result.seconds_double_samples / result.seconds_base;
  result.ratio_outputs = result.seconds_double_outputs / result.seconds_base;
  result.elements_per_second =
      static_cast<double>(samples) * static_cast<double>(output_dim) / result.seconds_base;
  return result;
}

}  // namespace epls
