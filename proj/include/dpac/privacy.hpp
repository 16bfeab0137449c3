// Copyright 2026 The DPAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Privacy calculus for the consensus algorithms: the analytic Gaussian
// trade-off curve kappa_eps and its inverse, the shuffle-matrix spectral
// bound alpha, noise-level designers for the DiShuf-based algorithms and
// the one-shot / centralized baselines, sufficient-condition checkers, and
// closed-form limiting MSE predictors.

#ifndef DPAC_PRIVACY_HPP
#define DPAC_PRIVACY_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpac/common.hpp"

namespace dpac::privacy {

enum class NoiseFamily { gaussian, laplace };

inline std::string to_string(NoiseFamily f) {
  return f == NoiseFamily::gaussian ? "gaussian" : "laplace";
}

enum class Algorithm {
  dishuf_gaussian,
  dishuf_laplace,
  osp_gaussian,
  osp_laplace,
  dpca_gaussian,
  dpca_laplace,
};

inline NoiseFamily family_of(Algorithm a) {
  switch (a) {
    case Algorithm::dishuf_gaussian:
    case Algorithm::osp_gaussian:
    case Algorithm::dpca_gaussian:
      return NoiseFamily::gaussian;
    default:
      return NoiseFamily::laplace;
  }
}

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dishuf_gaussian: return "dishuf-gaussian";
    case Algorithm::dishuf_laplace: return "dishuf-laplace";
    case Algorithm::osp_gaussian: return "osp-gaussian";
    case Algorithm::osp_laplace: return "osp-laplace";
    case Algorithm::dpca_gaussian: return "dpca-gaussian";
    case Algorithm::dpca_laplace: return "dpca-laplace";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "dishuf-gaussian") return Algorithm::dishuf_gaussian;
  if (s == "dishuf-laplace") return Algorithm::dishuf_laplace;
  if (s == "osp-gaussian") return Algorithm::osp_gaussian;
  if (s == "osp-laplace") return Algorithm::osp_laplace;
  if (s == "dpca-gaussian") return Algorithm::dpca_gaussian;
  if (s == "dpca-laplace") return Algorithm::dpca_laplace;
  throw ValidationError("unknown algorithm: " + s);
}

// Privacy levels (epsilon, delta) and the adjacency bound mu: two data
// vectors are mu-adjacent when they differ in one coordinate by at most mu.
struct PrivacyBudget {
  double epsilon = 0;
  double delta = 0;
  double mu = 1;

  void validate(NoiseFamily family) const {
    if (epsilon < 0) throw ValidationError("budget: epsilon must be >= 0");
    if (delta < 0 || delta >= 1) throw ValidationError("budget: delta must be in [0,1)");
    if (mu <= 0) throw ValidationError("budget: mu must be > 0");
    if (family == NoiseFamily::laplace && epsilon <= 0)
      throw ValidationError("budget: Laplace designs require epsilon > 0");
    if (family == NoiseFamily::gaussian && delta <= 0)
      throw ValidationError("budget: Gaussian designs require delta > 0");
  }
};

// Noise levels for one algorithm instance. Gaussian sigmas are standard
// deviations; Laplace sigmas are the scale b of L(0, b), variance 2 b^2.
// Scales are kept in extended precision: the shuffle noise grows like
// 1/(1-alpha), which leaves double range already at n ~ 150.
struct NoisePlan {
  NoiseFamily family = NoiseFamily::gaussian;
  Real sigma_gamma = 0;
  Real sigma_eta = 0;
  Real sigma_xi = 0;
  double design_param = 0;     // g (Gaussian, > 0) or h (Laplace, > 1)
  bool eta_clamped = false;    // designer clamped sigma_eta at 0
};

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// log Phi(x), stable into the far left tail where Phi underflows.
inline double log_std_normal_cdf(double x) {
  if (x > -37.0) {
    return std::log(std_normal_cdf(x));
  }
  // Asymptotic expansion Phi(x) ~ phi(x)/|x| (1 - 1/x^2 + 3/x^4 - 15/x^6).
  const double x2 = x * x;
  const double series = -1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * M_PI) + std::log1p(series);
}

// kappa_eps(s) = Phi(s/2 - eps/s) - e^eps Phi(-s/2 - eps/s), strictly
// increasing in s with range (0, 1). The second term is evaluated as
// exp(eps + log Phi(.)): e^eps alone overflows long before the product does.
inline double kappa(double eps, double s) {
  if (s <= 0) throw std::domain_error("kappa: s must be > 0");
  if (eps < 0) throw std::domain_error("kappa: eps must be >= 0");
  const double a = s / 2 - eps / s;
  const double b = -s / 2 - eps / s;
  const double tail = eps + log_std_normal_cdf(b);
  return std_normal_cdf(a) - (tail < -745.0 ? 0.0 : std::exp(tail));
}

// Inverse of kappa_eps at delta: bracket by doubling, then bisect.
// Monotonicity makes both steps safe.
inline double kappa_inv(double eps, double delta) {
  if (delta <= 0 || delta >= 1) throw std::domain_error("kappa_inv: delta must be in (0,1)");
  if (eps < 0) throw std::domain_error("kappa_inv: eps must be >= 0");
  double lo = 1e-9, hi = 1.0;
  for (int i = 0; i < 200 && kappa(eps, hi) < delta; ++i) hi *= 2;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (kappa(eps, mid) < delta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// 1 - alpha with alpha = (1 - (2(n + abar^-2))^-(n-1))^(1/(n-1)).
// Computed directly in log space: at n >= 6 the complement is ~1e-13 or
// smaller and "1 - stored alpha" would be pure cancellation noise.
inline Real alpha_complement(int n, Real abar) {
  if (n < 2) throw std::domain_error("alpha: n must be >= 2");
  if (abar < 1) throw std::domain_error("alpha: abar must be >= 1");
  const Real q = n - 1;
  const Real base = 2.0L * (static_cast<Real>(n) + 1.0L / (abar * abar));
  const Real log_x = -q * std::log(base);  // x = base^-(n-1)
  const Real x = std::exp(log_x);
  if (x == 0.0L)
    throw NumericalError("alpha_complement: 1-alpha underflows extended precision at n=" +
                         std::to_string(n));
  return -std::expm1(std::log1p(-x) / q);
}

inline Real alpha(int n, Real abar) { return 1.0L - alpha_complement(n, abar); }

// sigma_gamma per the Gaussian design rule, with design freedom g > 0, and
// sigma_eta at the equality frontier of the sufficient condition. When the
// bracket is nonpositive the condition already holds without shuffle noise
// and sigma_eta is clamped at zero.
inline NoisePlan design_gaussian(const PrivacyBudget& budget, int n, Real abar, double g) {
  budget.validate(NoiseFamily::gaussian);
  if (g <= 0) throw std::domain_error("design_gaussian: g must be > 0");
  if (n < 2) throw std::domain_error("design_gaussian: n must be >= 2");
  const Real k = kappa_inv(budget.epsilon, budget.delta);
  const Real mu = budget.mu;
  const Real gp1 = 1.0L + static_cast<Real>(g);
  NoisePlan plan;
  plan.family = NoiseFamily::gaussian;
  plan.design_param = g;
  plan.sigma_gamma = gp1 * mu / (std::sqrt(static_cast<Real>(n)) * k);
  const Real oma = alpha_complement(n, abar);
  const Real al = 1.0L - oma;
  const Real gp1sq_minus_1 = static_cast<Real>(g) * (2.0L + static_cast<Real>(g));
  const Real bracket = gp1 * gp1 * mu * mu / gp1sq_minus_1 -
                       gp1 * gp1 * mu * mu / (static_cast<Real>(n) * (n - 1) * al * al);
  if (bracket <= 0) {
    plan.sigma_eta = 0;
    plan.eta_clamped = true;
  } else {
    plan.sigma_eta = std::sqrt((n - 1) * al * al / (oma * oma * k * k) * bracket);
  }
  return plan;
}

// Laplace design: sigma_gamma = h mu / eps and
// sigma_eta = 2 mu h n sqrt(n-1) / ((1-alpha)(h-1) eps), h > 1.
inline NoisePlan design_laplace(const PrivacyBudget& budget, int n, Real abar, double h) {
  budget.validate(NoiseFamily::laplace);
  if (h <= 1) throw std::domain_error("design_laplace: h must exceed 1");
  if (n < 2) throw std::domain_error("design_laplace: n must be >= 2");
  const Real mu = budget.mu;
  const Real eps = budget.epsilon;
  const Real oma = alpha_complement(n, abar);
  NoisePlan plan;
  plan.family = NoiseFamily::laplace;
  plan.design_param = h;
  plan.sigma_gamma = static_cast<Real>(h) * mu / eps;
  plan.sigma_eta = 2.0L * mu * static_cast<Real>(h) * n * std::sqrt(static_cast<Real>(n - 1)) /
                   (oma * (static_cast<Real>(h) - 1.0L) * eps);
  return plan;
}

// Minimal one-shot / centralized noise levels. The average has sensitivity
// mu/n, the per-entry perturbation mu.
inline NoisePlan design_baseline(const PrivacyBudget& budget, int n, Algorithm algorithm) {
  const NoiseFamily family = family_of(algorithm);
  budget.validate(family);
  NoisePlan plan;
  plan.family = family;
  switch (algorithm) {
    case Algorithm::osp_laplace:
      plan.sigma_xi = budget.mu / budget.epsilon;
      break;
    case Algorithm::osp_gaussian:
      plan.sigma_xi = budget.mu / kappa_inv(budget.epsilon, budget.delta);
      break;
    case Algorithm::dpca_laplace:
      plan.sigma_xi = budget.mu / (static_cast<Real>(n) * budget.epsilon);
      break;
    case Algorithm::dpca_gaussian:
      plan.sigma_xi = budget.mu / (static_cast<Real>(n) * kappa_inv(budget.epsilon, budget.delta));
      break;
    default:
      throw std::domain_error("design_baseline: use design_gaussian/design_laplace for DiShuf");
  }
  return plan;
}

struct ConditionReport {
  bool satisfied = false;
  Real lhs = 0;            // noise side
  Real rhs = 0;            // budget side
  Real margin = 0;         // rhs - lhs (Gaussian), min slack (Laplace)
  Real margin_gamma = 0;   // Laplace: sigma_gamma slack
  Real margin_eta = 0;     // Laplace: sigma_eta slack
};

// Sufficient condition for the Gaussian algorithm:
//   1/(n sg^2) + (n-1) a^2 / (sg^2 + (1-a)^2 se^2)  <=  kinv^2 / mu^2.
// Equality-designed plans pass within a 1e-9 relative tolerance.
inline ConditionReport check_gaussian_condition(const NoisePlan& plan,
                                                const PrivacyBudget& budget, int n,
                                                Real abar) {
  if (plan.family != NoiseFamily::gaussian)
    throw std::domain_error("check_gaussian_condition: plan is not Gaussian");
  budget.validate(NoiseFamily::gaussian);
  const Real k = kappa_inv(budget.epsilon, budget.delta);
  const Real oma = alpha_complement(n, abar);
  const Real al = 1.0L - oma;
  const Real sg2 = plan.sigma_gamma * plan.sigma_gamma;
  const Real corr = oma * plan.sigma_eta;
  ConditionReport report;
  report.lhs = 1.0L / (n * sg2) + (n - 1) * al * al / (sg2 + corr * corr);
  report.rhs = k * k / (static_cast<Real>(budget.mu) * budget.mu);
  report.margin = report.rhs - report.lhs;
  report.satisfied = report.margin >= -1e-9L * report.rhs;
  return report;
}

// Both Laplace inequalities at the plan's stored h.
inline ConditionReport check_laplace_condition(const NoisePlan& plan,
                                               const PrivacyBudget& budget, int n,
                                               Real abar) {
  if (plan.family != NoiseFamily::laplace)
    throw std::domain_error("check_laplace_condition: plan is not Laplace");
  budget.validate(NoiseFamily::laplace);
  const double h = plan.design_param;
  if (h <= 1) throw std::domain_error("check_laplace_condition: plan carries no h > 1");
  const NoisePlan bound = design_laplace(budget, n, abar, h);
  ConditionReport report;
  report.margin_gamma = plan.sigma_gamma - bound.sigma_gamma;
  report.margin_eta = plan.sigma_eta - bound.sigma_eta;
  report.lhs = plan.sigma_eta;
  report.rhs = bound.sigma_eta;
  report.margin = std::min(report.margin_gamma, report.margin_eta);
  report.satisfied = report.margin_gamma >= -1e-9L * bound.sigma_gamma &&
                     report.margin_eta >= -1e-9L * bound.sigma_eta;
  return report;
}

// Theoretical limiting per-node mean-square error.
inline Real predict_mse(const NoisePlan& plan, int n, Algorithm algorithm) {
  if (family_of(algorithm) != plan.family)
    throw std::domain_error("predict_mse: plan family does not match algorithm");
  const Real nn = n;
  switch (algorithm) {
    case Algorithm::dishuf_gaussian:
      return plan.sigma_gamma * plan.sigma_gamma / nn;
    case Algorithm::dishuf_laplace:
      return 2.0L * plan.sigma_gamma * plan.sigma_gamma / (nn * nn);
    case Algorithm::osp_gaussian:
      return plan.sigma_xi * plan.sigma_xi / nn;
    case Algorithm::osp_laplace:
      return 2.0L * plan.sigma_xi * plan.sigma_xi / nn;
    case Algorithm::dpca_gaussian:
      return plan.sigma_xi * plan.sigma_xi;
    case Algorithm::dpca_laplace:
      return 2.0L * plan.sigma_xi * plan.sigma_xi;
  }
  throw std::domain_error("predict_mse: unknown algorithm");
}

}  // namespace dpac::privacy

#endif  // DPAC_PRIVACY_HPP
