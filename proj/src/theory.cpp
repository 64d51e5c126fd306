#include "kp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kp {
namespace {

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double x, double m, double sigma) {
  const double z = (x - m) / sigma;
  return std::exp(-0.5 * z * z) /
         (sigma * std::sqrt(2.0 * std::numbers::pi));
}

struct Simpson {
  const GaussianSummary& pos;
  const GaussianSummary& neg;
  int depth_limit = 60;

  double integrand(double x) const {
    return normal_pdf(x, pos.mean, pos.sigma()) * expected_rank(neg, x);
  }

  double simpson(double a, double b, double fa, double fm, double fb) const {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  double recurse(double a, double b, double fa, double fm, double fb,
                 double whole, double tol, int depth) const {
    if (depth > depth_limit)
      throw std::runtime_error("quadrature failed to converge");
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = integrand(lm), frm = integrand(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (std::abs(left + right - whole) <= 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
           recurse(m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
  }

  double integrate(double a, double b, double tol) const {
    const double m = 0.5 * (a + b);
    const double fa = integrand(a), fm = integrand(m), fb = integrand(b);
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 0);
  }
};

}  // namespace

void GaussianSummary::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
    throw std::invalid_argument(
        "gaussian summary needs a finite mean and strictly positive variance");
}

double GaussianSummary::sigma() const { return std::sqrt(variance); }

GaussianSummary fit_gaussian(std::span<const double> samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("need at least 2 samples to fit a gaussian");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double variance = ss / static_cast<double>(samples.size() - 1);
  if (!(variance > 0.0))
    throw std::runtime_error("degenerate fit: samples have zero variance");
  GaussianSummary g{mean, variance};
  g.validate();
  return g;
}

double expected_rank(const GaussianSummary& neg, double a) {
  neg.validate();
  return 1.0 - normal_cdf((a - neg.mean) / neg.sigma());
}

double perm_closed_form(const GaussianSummary& pos,
                        const GaussianSummary& neg) {
  pos.validate();
  neg.validate();
  return normal_cdf((neg.mean - pos.mean) /
                    std::sqrt(pos.variance + neg.variance));
}

double perm_quadrature(const GaussianSummary& pos,
                       const GaussianSummary& neg) {
  pos.validate();
  neg.validate();
  // The integrand is bounded by the positive pdf, so a window around the
  // positive mean captures all but ~1e-23 of the mass. Fixed panels keep the
  // adaptive refinement from terminating early on nodes that miss the peak.
  const double lo = pos.mean - 10.0 * pos.sigma();
  const double hi = pos.mean + 10.0 * pos.sigma();
  Simpson s{pos, neg};
  const int panels = 16;
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i)
    total += s.integrate(lo + i * width, lo + (i + 1) * width, 1e-12);
  return total;
}

double perm(const GaussianSummary& pos, const GaussianSummary& neg) {
  const double closed = perm_closed_form(pos, neg);
  const double quad = perm_quadrature(pos, neg);
  if (std::abs(closed - quad) > 1e-8)
    throw std::runtime_error("perm routes disagree beyond 1e-8");
  return closed;
}

double gaussian_w2(const GaussianSummary& a, const GaussianSummary& b) {
  a.validate();
  b.validate();
  const double dm = a.mean - b.mean;
  const double ds = a.sigma() - b.sigma();
  return std::sqrt(dm * dm + ds * ds);
}

void StabilityInput::validate() const {
  for (double v : {sigma2_mu1, sigma2_mu2, sigma2_nu1, sigma2_nu2})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("variances must be strictly positive");
}

double stability_bound(const StabilityInput& s) {
  s.validate();
  const double mu = 1.0 - std::pow(s.sigma2_mu1 / s.sigma2_mu2, 1.5);
  const double nu = 1.0 - std::pow(s.sigma2_nu1 / s.sigma2_nu2, 1.5);
  return std::max(mu, nu);
}

std::vector<SweepRow> lemma1_sweep(std::span<const double> gaps,
                                   double sigma_pos, double sigma_neg) {
  if (gaps.empty()) throw std::invalid_argument("empty gap grid");
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (!(gaps[i] > gaps[i - 1]))
      throw std::invalid_argument("gap grid must be strictly ascending");

  std::vector<SweepRow> rows(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const GaussianSummary pos{gaps[i], sigma_pos * sigma_pos};
    const GaussianSummary neg{0.0, sigma_neg * sigma_neg};
    rows[i].gap = gaps[i];
    rows[i].perm = perm(pos, neg);
    rows[i].w2 = gaussian_w2(pos, neg);
    if (i > 0)
      rows[i].monotone_ok = rows[i].perm <= rows[i - 1].perm + 1e-12 &&
                            rows[i].w2 >= rows[i - 1].w2 - 1e-12;
  }
  return rows;
}

std::vector<VarianceSweepRow> variance_sweep(
    double sigma_pos, std::span<const double> sigma_negs) {
  std::vector<VarianceSweepRow> rows(sigma_negs.size());
  for (std::size_t i = 0; i < sigma_negs.size(); ++i) {
    const GaussianSummary pos{0.0, sigma_pos * sigma_pos};
    const GaussianSummary neg{0.0, sigma_negs[i] * sigma_negs[i]};
    rows[i] = VarianceSweepRow{sigma_negs[i], perm(pos, neg),
                               gaussian_w2(pos, neg)};
  }
  return rows;
}

StabilityReport stability_check(std::span<const double> pos_scores,
                                std::span<const double> neg_scores,
                                double noise_sigma, std::size_t trials,
                                std::uint64_t seed, Exec exec) {
  if (pos_scores.size() != neg_scores.size())
    throw std::invalid_argument("score samples must have equal size");
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (!(noise_sigma >= 0.0))
    throw std::invalid_argument("noise_sigma must be non-negative");

  const GaussianSummary pos1 = fit_gaussian(pos_scores);
  const GaussianSummary neg1 = fit_gaussian(neg_scores);
  const double kp1 = gaussian_w2(pos1, neg1);

  StabilityReport report;
  report.trials.resize(trials);
  for_each_index(static_cast<std::int64_t>(trials), exec, [&](std::int64_t t) {
    std::mt19937_64 rng(seed_mix(seed, static_cast<std::uint64_t>(t)));
    std::vector<double> pos2(pos_scores.begin(), pos_scores.end());
    std::vector<double> neg2(neg_scores.begin(), neg_scores.end());
    if (noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, noise_sigma);
      for (double& x : pos2) x += noise(rng);
      for (double& x : neg2) x += noise(rng);
    }
    const GaussianSummary posf = fit_gaussian(pos2);
    const GaussianSummary negf = fit_gaussian(neg2);
    const double kp2 = gaussian_w2(posf, negf);

    StabilityTrial& trial = report.trials[t];
    if (kp1 == 0.0)
      trial.rel_change = kp2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
      trial.rel_change = std::abs(kp1 - kp2) / kp1;
    trial.bound = stability_bound(StabilityInput{pos1.variance, posf.variance,
                                                 neg1.variance, negf.variance});
    trial.violated = trial.rel_change > trial.bound + 1e-12;
  });
  for (const StabilityTrial& t : report.trials)
    if (t.violated) ++report.violations;
  return report;
}

}  // namespace kp
