#pragma once

#include <cstdint>

#include "kp/common.hpp"
#include "kp/persistence.hpp"

namespace kp {

struct SWConfig {
  std::size_t n_slices = 100;
  int order = 2;  // p, 1 or 2
  std::uint64_t seed = 0;
  // Evenly spaced directions over the half-circle instead of random ones;
  // removes Monte Carlo variance for regression tests.
  bool grid_directions = false;

  void validate() const;
};

// Sliced Wasserstein distance between two diagrams sharing a frame. Each
// diagram is augmented with the diagonal projections of the other, both sets
// are projected onto L directions spanning the half-circle, and the distance
// is (mean over slices of the sorted 1D W_p^p)^(1/p). Slot-parallel over
// slices.
double sliced_wasserstein(const PersistenceDiagram& d1,
                          const PersistenceDiagram& d2, const SWConfig& cfg,
                          Exec exec = Exec::Parallel);

// Exact p-Wasserstein distance between diagrams: optimal partial matching
// where unmatched points pay their distance to the diagonal, solved as an
// (n1+n2) x (n1+n2) assignment problem. Refuses inputs beyond max_points
// combined points.
double exact_wasserstein(const PersistenceDiagram& d1,
                         const PersistenceDiagram& d2, int order,
                         std::size_t max_points = 5000);

// The headline score: sliced Wasserstein between the concatenated
// sublevel+superlevel diagrams of the positive and negative graphs, computed
// over a shared frame. Higher means the model separates the two graphs more.
double kp_score(const ScoredGraph& pos, const ScoredGraph& neg,
                const SWConfig& cfg, Exec exec = Exec::Parallel);

}  // namespace kp
