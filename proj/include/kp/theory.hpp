#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kp/common.hpp"

namespace kp {

struct GaussianSummary {
  double mean = 0.0;
  double variance = 1.0;

  void validate() const;  // variance strictly positive and finite
  double sigma() const;
};

// Fits mean and unbiased variance; needs >= 2 samples and a non-degenerate
// spread.
GaussianSummary fit_gaussian(std::span<const double> samples);

// Upper-tail mass of the negative score distribution above threshold a:
// 1 - Phi((a - m) / sigma).
double expected_rank(const GaussianSummary& neg, double a);

// P(Y >= X) for X ~ pos, Y ~ neg via Phi((m_neg - m_pos)/sqrt(var_p+var_n)).
double perm_closed_form(const GaussianSummary& pos, const GaussianSummary& neg);

// Same integral by adaptive Simpson quadrature over a +-10 sigma window.
// Throws std::runtime_error if the recursion fails to converge.
double perm_quadrature(const GaussianSummary& pos, const GaussianSummary& neg);

// Routes through both implementations and insists they agree to 1e-8.
double perm(const GaussianSummary& pos, const GaussianSummary& neg);

// Univariate 2-Wasserstein: sqrt((m_a - m_b)^2 + (sigma_a - sigma_b)^2).
double gaussian_w2(const GaussianSummary& a, const GaussianSummary& b);

struct StabilityInput {
  double sigma2_mu1 = 1.0;  // positives, original
  double sigma2_mu2 = 1.0;  // positives, corrupted
  double sigma2_nu1 = 1.0;  // negatives, original
  double sigma2_nu2 = 1.0;  // negatives, corrupted

  void validate() const;
};

// max(1 - (s_mu1/s_mu2)^(3/2), 1 - (s_nu1/s_nu2)^(3/2)): the univariate
// bound on the relative score-distribution distance change under noise.
double stability_bound(const StabilityInput& s);

struct SweepRow {
  double gap = 0.0;
  double perm = 0.0;
  double w2 = 0.0;
  // False when this row breaks the expected monotone order (perm
  // non-increasing, w2 non-decreasing) against the previous row.
  bool monotone_ok = true;
};

// Evaluates perm and gaussian_w2 for pos = N(gap, sigma_pos^2) vs
// neg = N(0, sigma_neg^2) over an ascending grid of mean gaps.
std::vector<SweepRow> lemma1_sweep(std::span<const double> gaps,
                                   double sigma_pos, double sigma_neg);

struct VarianceSweepRow {
  double sigma_neg = 0.0;
  double perm = 0.0;
  double w2 = 0.0;
};

// Gap-zero sweep over negative-side sigmas; recorded for inspection, nothing
// asserted about the perm column.
std::vector<VarianceSweepRow> variance_sweep(double sigma_pos,
                                             std::span<const double> sigma_negs);

struct StabilityTrial {
  double rel_change = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct StabilityReport {
  std::vector<StabilityTrial> trials;
  std::size_t violations = 0;
};

// Adds N(0, noise_sigma^2) noise to both score samples, refits Gaussians and
// compares the relative change of the gaussian_w2 separation against
// stability_bound, once per trial. Slot-parallel over trials.
StabilityReport stability_check(std::span<const double> pos_scores,
                                std::span<const double> neg_scores,
                                double noise_sigma, std::size_t trials,
                                std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace kp
