#include "kp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace kp {

void SWConfig::validate() const {
  if (n_slices == 0) throw std::invalid_argument("n_slices must be >= 1");
  if (order != 1 && order != 2)
    throw std::invalid_argument("order must be 1 or 2");
}

namespace {

void check_frames(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  if (d1.baseline != d2.baseline || d1.cap != d2.cap)
    throw std::invalid_argument(
        "diagrams were built over different (baseline, cap) frames");
}

// Augment each diagram with the diagonal projections of the other so both
// sides have equal mass under the partial-matching semantics.
void augment(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
             std::vector<DiagramPoint>& a, std::vector<DiagramPoint>& b) {
  a = d1.points;
  b = d2.points;
  a.reserve(d1.points.size() + d2.points.size());
  b.reserve(a.capacity());
  for (const DiagramPoint& p : d2.points) {
    const double m = 0.5 * (p.birth + p.death);
    a.push_back(DiagramPoint{m, m});
  }
  for (const DiagramPoint& p : d1.points) {
    const double m = 0.5 * (p.birth + p.death);
    b.push_back(DiagramPoint{m, m});
  }
}

}  // namespace

double sliced_wasserstein(const PersistenceDiagram& d1,
                          const PersistenceDiagram& d2, const SWConfig& cfg,
                          Exec exec) {
  cfg.validate();
  check_frames(d1, d2);
  if (d1.points.empty() && d2.points.empty()) return 0.0;

  std::vector<DiagramPoint> a, b;
  augment(d1, d2, a, b);

  const std::size_t L = cfg.n_slices;
  std::vector<double> thetas(L);
  if (cfg.grid_directions) {
    for (std::size_t l = 0; l < L; ++l)
      thetas[l] = (static_cast<double>(l) + 0.5) * std::numbers::pi /
                  static_cast<double>(L);
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, std::numbers::pi);
    for (double& t : thetas) t = uni(rng);
  }

  std::vector<double> slice_cost(L);
  for_each_index(static_cast<std::int64_t>(L), exec, [&](std::int64_t l) {
    const double c = std::cos(thetas[l]);
    const double s = std::sin(thetas[l]);
    std::vector<double> pa(a.size()), pb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      pa[i] = c * a[i].birth + s * a[i].death;
    for (std::size_t i = 0; i < b.size(); ++i)
      pb[i] = c * b[i].birth + s * b[i].death;
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double cost = 0.0;
    if (cfg.order == 1) {
      for (std::size_t i = 0; i < pa.size(); ++i)
        cost += std::abs(pa[i] - pb[i]);
    } else {
      for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = pa[i] - pb[i];
        cost += d * d;
      }
    }
    slice_cost[l] = cost;
  });

  double mean = 0.0;
  for (double c : slice_cost) mean += c;
  mean /= static_cast<double>(L);
  return cfg.order == 1 ? mean : std::sqrt(mean);
}

namespace {

// Shortest-augmenting-path assignment on a dense square cost matrix
// (Jonker-Volgenant style with potentials). Returns the minimum total cost.
double assignment_cost(const std::vector<double>& cost, std::size_t n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), char(0));
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      const double* row = cost.data() + (i0 - 1) * n;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) total += cost[(p[j] - 1) * n + (j - 1)];
  return total;
}

double diagonal_gap(const DiagramPoint& p) {
  return std::abs(p.death - p.birth) / std::numbers::sqrt2;
}

double ground_pow(const DiagramPoint& a, const DiagramPoint& b, int order) {
  const double dx = a.birth - b.birth;
  const double dy = a.death - b.death;
  const double d2 = dx * dx + dy * dy;
  return order == 2 ? d2 : std::sqrt(d2);
}

}  // namespace

double exact_wasserstein(const PersistenceDiagram& d1,
                         const PersistenceDiagram& d2, int order,
                         std::size_t max_points) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("order must be 1 or 2");
  check_frames(d1, d2);
  const std::size_t n1 = d1.points.size();
  const std::size_t n2 = d2.points.size();
  const std::size_t n = n1 + n2;
  if (n == 0) return 0.0;
  if (n > max_points)
    throw std::runtime_error(
        "diagrams too large for exact matching (" + std::to_string(n) + " > " +
        std::to_string(max_points) + " points); use sliced_wasserstein");

  // Square matrix: real-vs-real block, then diagonal slack rows/columns.
  // Matching a real point to any slack column costs its diagonal gap; the
  // slack-vs-slack block is free.
  std::vector<double> cost(n * n, 0.0);
  std::vector<double> diag2(n2);
  for (std::size_t j = 0; j < n2; ++j) {
    const double g = diagonal_gap(d2.points[j]);
    diag2[j] = order == 2 ? g * g : g;
  }
  for (std::size_t i = 0; i < n1; ++i) {
    const double g = diagonal_gap(d1.points[i]);
    const double diag_i = order == 2 ? g * g : g;
    for (std::size_t j = 0; j < n2; ++j)
      cost[i * n + j] = ground_pow(d1.points[i], d2.points[j], order);
    for (std::size_t j = n2; j < n; ++j) cost[i * n + j] = diag_i;
  }
  for (std::size_t i = n1; i < n; ++i)
    for (std::size_t j = 0; j < n2; ++j) cost[i * n + j] = diag2[j];

  const double total = assignment_cost(cost, n);
  return order == 2 ? std::sqrt(std::max(total, 0.0)) : std::max(total, 0.0);
}

double kp_score(const ScoredGraph& pos, const ScoredGraph& neg,
                const SWConfig& cfg, Exec exec) {
  cfg.validate();
  if (pos.edges.size() != neg.edges.size())
    throw std::invalid_argument(
        "positive and negative graphs must carry the same edge count");
  const auto [baseline, cap] = shared_frame(pos, neg);
  PersistenceDiagram d_pos = graph_pd(pos, baseline, cap);
  PersistenceDiagram d_neg = graph_pd(neg, baseline, cap);
  return sliced_wasserstein(d_pos, d_neg, cfg, exec);
}

}  // namespace kp
