#ifndef SPLITHMC_THEORY_HPP
#define SPLITHMC_THEORY_HPP

// Closed-form energy-error and acceptance results for Gaussian targets with
// unit mass.

#include "splithmc/stability.hpp"

#include <span>
#include <vector>

namespace splithmc {

/// 2 dH(theta, p) = A theta^2 + 2 B theta p + C p^2 for an L-step leg on the
/// standard normal target.
struct QuadraticEnergyForm {
  double A;
  double B;
  double C;

  double delta_h(double theta, double p) const noexcept {
    return 0.5 * (A * theta * theta + 2.0 * B * theta * p + C * p * p);
  }
};

/// Throws OutsideStability outside the stability interval.
QuadraticEnergyForm quadratic_form(const IntegratorScheme& scheme, double epsilon, int steps);

/// E(dH) at stationarity on the standard normal: (A + C)/2 = sin^2(L alpha) rho.
double expected_delta_h(const IntegratorScheme& scheme, double epsilon, int steps);

/// Sum of the per-component expectations for independent components with
/// standard deviations `sigmas` (each component rescaled to unit variance).
double expected_delta_h_diagonal(const IntegratorScheme& scheme, double epsilon, int steps,
                                 const Vector& sigmas);

/// E(a) = 1 - (2/pi) arctan sqrt(mu/2). Throws Error for mu < 0.
double expected_acceptance_univariate(double mu);

struct AcceptancePrediction {
  double value;
  /// sin(L alpha) = 0 or chi = 1: dH vanishes identically and E(a) = 1.
  bool degenerate;
};

/// Univariate acceptance for a concrete (scheme, epsilon, L).
AcceptancePrediction univariate_acceptance(const IntegratorScheme& scheme, double epsilon, int steps);

struct DeltaHMoments {
  double m2;
  double m3;
  double m4;
};

/// Raw moments of dH as polynomials in mu = E(dH). Throws Error for mu < 0.
DeltaHMoments delta_h_moments(double mu);

/// Standard normal CDF.
double normal_cdf(double x);

/// 2 Phi(-sqrt(mu/2)). Throws Error for mu < 0.
double gupta_acceptance(double mu);

/// (zeta^4/32) / (1 - zeta^2/4) for 0 < zeta < 2; throws Error otherwise.
double leapfrog_energy_bound(double eps_over_sigma);

struct CurvePoint {
  double mu;
  double acceptance;
};

std::vector<CurvePoint> theorem1_curve(std::span<const double> mu_grid);
std::vector<CurvePoint> gupta_curve(std::span<const double> mu_grid);

}  // namespace splithmc

#endif  // SPLITHMC_THEORY_HPP
