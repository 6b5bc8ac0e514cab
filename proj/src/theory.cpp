#include "splithmc/theory.hpp"

#include <cmath>
#include <numbers>

namespace splithmc {
namespace {

void require_nonnegative(double mu, const char* what) {
  if (!(mu >= 0.0)) throw Error(std::string(what) + ": mean energy error must be nonnegative");
}

}  // namespace

QuadraticEnergyForm quadratic_form(const IntegratorScheme& scheme, double epsilon, int steps) {
  if (steps < 1) throw Error("quadratic form: number of steps must be at least 1");
  const ChiAlpha ca = chi_alpha(scheme, epsilon);
  const double s = std::sin(steps * ca.alpha);
  const double c = std::cos(steps * ca.alpha);
  const double chi2 = ca.chi * ca.chi;
  return QuadraticEnergyForm{s * s * (1.0 / chi2 - 1.0), c * s * (ca.chi - 1.0 / ca.chi),
                             s * s * (chi2 - 1.0)};
}

double expected_delta_h(const IntegratorScheme& scheme, double epsilon, int steps) {
  const QuadraticEnergyForm q = quadratic_form(scheme, epsilon, steps);
  return 0.5 * (q.A + q.C);
}

double expected_delta_h_diagonal(const IntegratorScheme& scheme, double epsilon, int steps,
                                 const Vector& sigmas) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < sigmas.size(); ++j) {
    total += expected_delta_h(scheme, epsilon / sigmas[j], steps);
  }
  return total;
}

double expected_acceptance_univariate(double mu) {
  require_nonnegative(mu, "expected acceptance");
  return 1.0 - 2.0 / std::numbers::pi * std::atan(std::sqrt(0.5 * mu));
}

AcceptancePrediction univariate_acceptance(const IntegratorScheme& scheme, double epsilon, int steps) {
  const ChiAlpha ca = chi_alpha(scheme, epsilon);
  const double s = std::sin(steps * ca.alpha);
  if (std::abs(s) < 1e-12 || ca.chi == 1.0) return {1.0, true};
  return {expected_acceptance_univariate(expected_delta_h(scheme, epsilon, steps)), false};
}

DeltaHMoments delta_h_moments(double mu) {
  require_nonnegative(mu, "moments");
  const double mu2 = mu * mu, mu3 = mu2 * mu, mu4 = mu3 * mu;
  return {2.0 * mu + 3.0 * mu2, 18.0 * mu2 + 15.0 * mu3, 36.0 * mu2 + 180.0 * mu3 + 105.0 * mu4};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gupta_acceptance(double mu) {
  require_nonnegative(mu, "gupta acceptance");
  return 2.0 * normal_cdf(-std::sqrt(0.5 * mu));
}

double leapfrog_energy_bound(double zeta) {
  if (!(zeta > 0.0 && zeta < 2.0)) throw Error("leapfrog bound: eps/sigma must lie in (0, 2)");
  const double z2 = zeta * zeta;
  return (z2 * z2 / 32.0) / (1.0 - z2 / 4.0);
}

std::vector<CurvePoint> theorem1_curve(std::span<const double> mu_grid) {
  std::vector<CurvePoint> out;
  out.reserve(mu_grid.size());
  for (double mu : mu_grid) out.push_back({mu, expected_acceptance_univariate(mu)});
  return out;
}

std::vector<CurvePoint> gupta_curve(std::span<const double> mu_grid) {
  std::vector<CurvePoint> out;
  out.reserve(mu_grid.size());
  for (double mu : mu_grid) out.push_back({mu, gupta_acceptance(mu)});
  return out;
}

}  // namespace splithmc
