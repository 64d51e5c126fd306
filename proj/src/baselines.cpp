#include "kp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace kp {
namespace {

double norm(const double* v, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

constexpr double kZeroNorm = 1e-300;

}  // namespace

double conicity(const EmbeddingModel& m) {
  const std::size_t n = m.num_entities();
  const std::size_t d = m.dim;
  if (n == 0 || d == 0) throw std::invalid_argument("empty entity table");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* v = m.entities.row(i);
    for (std::size_t k = 0; k < d; ++k) mean[k] += v[k];
  }
  for (double& x : mean) x /= static_cast<double>(n);
  const double mean_norm = norm(mean.data(), d);
  if (mean_norm < kZeroNorm)
    throw std::runtime_error("conicity undefined: mean embedding is zero");

  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* v = m.entities.row(i);
    const double vn = norm(v, d);
    if (vn < kZeroNorm) {
      std::cerr << "conicity: skipping zero-norm entity " << i << "\n";
      continue;
    }
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += v[k] * mean[k];
    sum += dot / (vn * mean_norm);
    ++used;
  }
  if (used == 0)
    throw std::runtime_error("conicity undefined: all entity vectors are zero");
  return sum / static_cast<double>(used);
}

double avl(const EmbeddingModel& m) {
  const std::size_t n = m.num_entities();
  if (n == 0 || m.dim == 0) throw std::invalid_argument("empty entity table");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += norm(m.entities.row(i), m.dim);
  return sum / static_cast<double>(n);
}

void KernelConfig::validate() const {
  if (n_sampled_nodes < 2)
    throw std::invalid_argument("n_sampled_nodes must be >= 2");
  if (n_repeats == 0) throw std::invalid_argument("n_repeats must be >= 1");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::uint32_t> sample_nodes(std::size_t n_nodes, std::size_t m,
                                        std::mt19937_64& rng) {
  std::vector<std::uint32_t> idx(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i)
    idx[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_nodes - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  return idx;
}

// Finite shortest-path lengths between distinct sampled nodes, via
// Floyd-Warshall on the induced subgraph with shifted weights.
std::vector<double> path_lengths(const ScoredGraph& g,
                                 const std::vector<std::uint32_t>& nodes,
                                 double shift) {
  const std::size_t m = nodes.size();
  std::unordered_map<std::uint32_t, std::size_t> local;
  local.reserve(m);
  for (std::size_t i = 0; i < m; ++i) local.emplace(nodes[i], i);

  std::vector<double> dist(m * m, kInf);
  for (std::size_t i = 0; i < m; ++i) dist[i * m + i] = 0.0;
  for (const ScoredEdge& e : g.edges) {
    auto hi = local.find(e.head);
    auto ti = local.find(e.tail);
    if (hi == local.end() || ti == local.end()) continue;
    const double w = e.weight - shift;
    double& slot = dist[hi->second * m + ti->second];
    slot = std::min(slot, w);
  }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < m; ++i) {
      const double dik = dist[i * m + k];
      if (dik == kInf) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const double alt = dik + dist[k * m + j];
        if (alt < dist[i * m + j]) dist[i * m + j] = alt;
      }
    }

  std::vector<double> lengths;
  lengths.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && dist[i * m + j] != kInf)
        lengths.push_back(dist[i * m + j]);
  return lengths;
}

std::unordered_map<std::int64_t, double> histogram(
    const std::vector<double>& lengths, double bandwidth) {
  std::unordered_map<std::int64_t, double> h;
  for (double d : lengths)
    h[static_cast<std::int64_t>(std::floor(d / bandwidth))] += 1.0;
  return h;
}

double cosine(const std::unordered_map<std::int64_t, double>& a,
              const std::unordered_map<std::int64_t, double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [bin, v] : a) {
    na += v * v;
    auto it = b.find(bin);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [bin, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double shortest_path_kernel(const ScoredGraph& g1, const ScoredGraph& g2,
                            const KernelConfig& cfg, Exec exec) {
  cfg.validate();
  if (g1.n_nodes == 0 || g2.n_nodes == 0 || g1.edges.empty() ||
      g2.edges.empty())
    throw std::invalid_argument("kernel needs two non-empty graphs");

  const double shift = std::min(g1.min_weight(), g2.min_weight());
  const double span =
      std::max(g1.max_weight(), g2.max_weight()) - shift;
  double bandwidth = cfg.bandwidth;
  if (bandwidth <= 0.0) bandwidth = span > 0.0 ? span / 32.0 : 1.0;

  std::vector<double> sims(cfg.n_repeats);
  std::vector<char> failed(cfg.n_repeats, 0);
  for_each_index(
      static_cast<std::int64_t>(cfg.n_repeats), exec, [&](std::int64_t rep) {
        std::mt19937_64 rng(
            seed_mix(cfg.seed, static_cast<std::uint64_t>(rep)));
        const std::size_t m1 = std::min(cfg.n_sampled_nodes, g1.n_nodes);
        const std::size_t m2 = std::min(cfg.n_sampled_nodes, g2.n_nodes);
        // A sample with no finite paths anywhere is useless; redraw a few
        // times before giving up on this repeat.
        for (std::size_t attempt = 0; attempt < cfg.n_repeats + 1; ++attempt) {
          // Graphs over the same node universe get one paired sample, so a
          // graph always scores 1 against itself.
          const auto n1 = sample_nodes(g1.n_nodes, m1, rng);
          const auto n2 = g1.n_nodes == g2.n_nodes
                              ? n1
                              : sample_nodes(g2.n_nodes, m2, rng);
          const auto l1 = path_lengths(g1, n1, shift);
          const auto l2 = path_lengths(g2, n2, shift);
          if (l1.empty() && l2.empty()) continue;
          sims[rep] = cosine(histogram(l1, bandwidth), histogram(l2, bandwidth));
          return;
        }
        failed[rep] = 1;
      });

  for (std::size_t rep = 0; rep < cfg.n_repeats; ++rep)
    if (failed[rep])
      throw std::runtime_error(
          "graph kernel: no finite paths after repeated sampling");
  double mean = 0.0;
  for (double s : sims) mean += s;
  return mean / static_cast<double>(cfg.n_repeats);
}

}  // namespace kp
