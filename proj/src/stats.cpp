#include "kp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace kp {
namespace {

void validate_series(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("series lengths differ");
  if (xs.size() < 2)
    throw std::invalid_argument("need at least 2 paired points");
  for (double v : xs)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in x");
  for (double v : ys)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in y");
}

// Counts pairs (i < j) with a[i] > a[j] while sorting a.
std::uint64_t merge_count(std::vector<double>& a, std::vector<double>& tmp,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count =
      merge_count(a, tmp, lo, mid) + merge_count(a, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      tmp[k++] = a[i++];
    } else {
      count += mid - i;
      tmp[k++] = a[j++];
    }
  }
  while (i < mid) tmp[k++] = a[i++];
  while (j < hi) tmp[k++] = a[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, a.begin() + lo);
  return count;
}

double tie_pairs(std::vector<double> sorted_values) {
  double pairs = 0.0;
  std::size_t i = 0;
  while (i < sorted_values.size()) {
    std::size_t j = i;
    while (j < sorted_values.size() && sorted_values[j] == sorted_values[i])
      ++j;
    const double t = static_cast<double>(j - i);
    pairs += t * (t - 1.0) / 2.0;
    i = j;
  }
  return pairs;
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  validate_series(xs, ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::domain_error("correlation undefined: zero-variance series");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && xs[idx[j]] == xs[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) /
                           2.0 +
                       1.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  validate_series(xs, ys);
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> xs, std::span<const double> ys) {
  validate_series(xs, ys);
  const std::size_t n = xs.size();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return ys[a] < ys[b];
  });

  // Tie-pair counts: x groups (n1), y groups (n2), joint groups (n3).
  double n1 = 0.0, n3 = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && xs[idx[j]] == xs[idx[i]]) ++j;
    const double t = static_cast<double>(j - i);
    n1 += t * (t - 1.0) / 2.0;
    std::size_t k = i;
    while (k < j) {
      std::size_t l = k;
      while (l < j && ys[idx[l]] == ys[idx[k]]) ++l;
      const double v = static_cast<double>(l - k);
      n3 += v * (v - 1.0) / 2.0;
      k = l;
    }
    i = j;
  }
  std::vector<double> ys_sorted(ys.begin(), ys.end());
  std::sort(ys_sorted.begin(), ys_sorted.end());
  const double n2 = tie_pairs(std::move(ys_sorted));

  std::vector<double> seq(n), tmp(n);
  for (std::size_t k = 0; k < n; ++k) seq[k] = ys[idx[k]];
  const std::uint64_t swaps = merge_count(seq, tmp, 0, n);

  const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) /
                    2.0;
  const double num =
      n0 - n1 - n2 + n3 - 2.0 * static_cast<double>(swaps);
  const double den = std::sqrt((n0 - n1) * (n0 - n2));
  if (den == 0.0)
    throw std::domain_error("correlation undefined: zero-variance series");
  return num / den;
}

}  // namespace kp
