#include "kp/persistence.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace kp {
namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> elder;  // smallest vertex id in the component

  explicit UnionFind(std::size_t n) : parent(n), elder(n) {
    std::iota(parent.begin(), parent.end(), 0u);
    std::iota(elder.begin(), elder.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

struct Frame {
  double baseline;
  double cap;
};

Frame resolve_frame(const ScoredGraph& g, std::optional<double> baseline,
                    std::optional<double> cap) {
  if (g.n_nodes == 0) throw std::invalid_argument("graph has no nodes");
  double lo = 0.0, hi = 0.0;
  if (!g.edges.empty()) {
    lo = g.min_weight();
    hi = g.max_weight();
  }
  Frame f{baseline.value_or(lo), cap.value_or(hi)};
  if (!g.edges.empty()) {
    if (f.baseline > lo)
      throw std::invalid_argument("baseline exceeds the minimum edge weight");
    if (f.cap < hi)
      throw std::invalid_argument("cap is below the maximum edge weight");
  }
  if (f.baseline > f.cap)
    throw std::invalid_argument("baseline exceeds cap");
  return f;
}

// Core elder-rule sweep over edges sorted ascending by weight.
PersistenceDiagram sublevel_core(std::size_t n_nodes,
                                 std::vector<ScoredEdge> edges, Frame f) {
  for (const ScoredEdge& e : edges)
    if (e.head >= n_nodes || e.tail >= n_nodes)
      throw std::invalid_argument("edge endpoint outside the node set");
  std::stable_sort(edges.begin(), edges.end(),
                   [](const ScoredEdge& a, const ScoredEdge& b) {
                     return a.weight < b.weight;
                   });

  PersistenceDiagram pd;
  pd.baseline = f.baseline;
  pd.cap = f.cap;
  pd.points.reserve(n_nodes);

  UnionFind uf(n_nodes);
  for (const ScoredEdge& e : edges) {
    std::uint32_t ra = uf.find(e.head);
    std::uint32_t rb = uf.find(e.tail);
    if (ra == rb) continue;
    // The component with the larger oldest id dies at this weight.
    if (uf.elder[ra] > uf.elder[rb]) std::swap(ra, rb);
    pd.points.push_back(DiagramPoint{f.baseline, e.weight});
    uf.parent[rb] = ra;
  }
  for (std::uint32_t v = 0; v < n_nodes; ++v)
    if (uf.find(v) == v) pd.points.push_back(DiagramPoint{f.baseline, f.cap});
  return pd;
}

}  // namespace

PersistenceDiagram sublevel_pd(const ScoredGraph& g,
                               std::optional<double> baseline,
                               std::optional<double> cap) {
  const Frame f = resolve_frame(g, baseline, cap);
  return sublevel_core(g.n_nodes, g.edges, f);
}

PersistenceDiagram superlevel_pd(const ScoredGraph& g,
                                 std::optional<double> baseline,
                                 std::optional<double> cap) {
  const Frame f = resolve_frame(g, baseline, cap);
  std::vector<ScoredEdge> negated = g.edges;
  for (ScoredEdge& e : negated) e.weight = -e.weight;
  PersistenceDiagram pd =
      sublevel_core(g.n_nodes, std::move(negated), Frame{-f.cap, -f.baseline});
  for (DiagramPoint& p : pd.points) {
    const double birth = -p.death;
    const double death = -p.birth;
    p.birth = birth;
    p.death = death;
  }
  pd.baseline = f.baseline;
  pd.cap = f.cap;
  return pd;
}

PersistenceDiagram graph_pd(const ScoredGraph& g, double shared_baseline,
                            double shared_cap) {
  PersistenceDiagram sub = sublevel_pd(g, shared_baseline, shared_cap);
  PersistenceDiagram super = superlevel_pd(g, shared_baseline, shared_cap);
  sub.points.insert(sub.points.end(), super.points.begin(),
                    super.points.end());
  return sub;
}

std::pair<double, double> shared_frame(const ScoredGraph& a,
                                       const ScoredGraph& b) {
  if (a.edges.empty() && b.edges.empty()) return {0.0, 0.0};
  double lo, hi;
  if (a.edges.empty()) {
    lo = b.min_weight();
    hi = b.max_weight();
  } else if (b.edges.empty()) {
    lo = a.min_weight();
    hi = a.max_weight();
  } else {
    lo = std::min(a.min_weight(), b.min_weight());
    hi = std::max(a.max_weight(), b.max_weight());
  }
  return {lo, hi};
}

void write_diagram_csv(std::ostream& out, const PersistenceDiagram& sub,
                       const PersistenceDiagram& super) {
  out.precision(17);
  out << "direction,birth,death\n";
  for (const DiagramPoint& p : sub.points)
    out << "sub," << p.birth << ',' << p.death << '\n';
  for (const DiagramPoint& p : super.points)
    out << "super," << p.birth << ',' << p.death << '\n';
}

}  // namespace kp
