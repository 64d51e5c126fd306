#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "kp/sampling.hpp"

namespace kp {

struct DiagramPoint {
  double birth = 0.0;
  double death = 0.0;
  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

// 0-dimensional persistence diagram of a weighted graph. All vertices are
// born at the shared finite baseline; components still alive when the
// filtration ends die at the cap, so every diagram point is finite and two
// diagrams built over the same (baseline, cap) frame are comparable.
struct PersistenceDiagram {
  std::vector<DiagramPoint> points;
  double baseline = 0.0;
  double cap = 0.0;
};

// Sublevel filtration: edges enter in ascending weight order. One bar per
// vertex; each union-find merge kills the component whose oldest vertex id is
// larger (elder rule), survivors die at the cap. Unset baseline/cap default
// to the min/max edge weight (0 for edgeless graphs).
PersistenceDiagram sublevel_pd(const ScoredGraph& g,
                               std::optional<double> baseline = {},
                               std::optional<double> cap = {});

// Superlevel filtration: edges enter in descending weight order. Equals the
// sublevel diagram of the negated graph with both coordinates negated back.
PersistenceDiagram superlevel_pd(const ScoredGraph& g,
                                 std::optional<double> baseline = {},
                                 std::optional<double> cap = {});

// Concatenation of the sublevel and superlevel diagrams: 2 * n_nodes points.
PersistenceDiagram graph_pd(const ScoredGraph& g, double shared_baseline,
                            double shared_cap);

// The (baseline, cap) frame spanning both graphs of a comparison.
std::pair<double, double> shared_frame(const ScoredGraph& a,
                                       const ScoredGraph& b);

// CSV rows (direction, birth, death) with a header line; direction is the
// literal "sub" or "super".
void write_diagram_csv(std::ostream& out, const PersistenceDiagram& sub,
                       const PersistenceDiagram& super);

}  // namespace kp
