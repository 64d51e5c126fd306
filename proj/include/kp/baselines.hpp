#pragma once

#include <cstdint>

#include "kp/common.hpp"
#include "kp/kge_models.hpp"
#include "kp/sampling.hpp"

namespace kp {

// Mean cosine between each entity vector and the mean entity vector.
// Zero-norm entity rows are skipped with a warning on stderr; a zero mean
// vector makes the quantity undefined and throws std::runtime_error.
double conicity(const EmbeddingModel& m);

// Mean Euclidean norm of the entity vectors.
double avl(const EmbeddingModel& m);

struct KernelConfig {
  std::size_t n_sampled_nodes = 100;
  // Histogram bin width for path lengths; <= 0 means span / 32 (1.0 when the
  // weights have no spread).
  double bandwidth = 0.0;
  std::size_t n_repeats = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Shortest-path graph kernel: per repeat, sample nodes from each graph, run
// all-pairs shortest paths on the induced subgraphs (weights shifted
// non-negative by the global minimum), histogram the finite path lengths
// with fixed bins and take the cosine of the two histograms. Returns the
// mean over repeats; repeats run slot-parallel.
double shortest_path_kernel(const ScoredGraph& g1, const ScoredGraph& g2,
                            const KernelConfig& cfg,
                            Exec exec = Exec::Parallel);

}  // namespace kp
