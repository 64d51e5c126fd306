#pragma once

#include <span>
#include <vector>

namespace kp {

// All three throw std::invalid_argument on length mismatch, fewer than 2
// points, or non-finite values, and std::domain_error when the coefficient
// is undefined (a zero-variance series).
double pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of average-tied ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Kendall tau-b with tie correction, O(n log n) merge-sort counting.
double kendall_tau_b(std::span<const double> xs, std::span<const double> ys);

// Average ranks (ties share the mean of their positions, 1-based).
std::vector<double> average_ranks(std::span<const double> xs);

}  // namespace kp
