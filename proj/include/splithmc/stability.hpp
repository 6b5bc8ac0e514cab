#ifndef SPLITHMC_STABILITY_HPP
#define SPLITHMC_STABILITY_HPP

// Linear analysis of the integrators on the unit harmonic oscillator
// dtheta/dt = p, dp/dt = -theta (standard Gaussian target, unit mass).

#include "splithmc/integrators.hpp"

#include <utility>
#include <vector>

namespace splithmc {

class OutsideStability : public Error {
 public:
  using Error::Error;
};

/// Linear map (theta, p) -> (m11 theta + m12 p, m21 theta + m22 p).
struct OneStepMatrix {
  double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

  double det() const noexcept { return m11 * m22 - m12 * m21; }
  double trace() const noexcept { return m11 + m22; }
  std::pair<double, double> apply(double theta, double p) const noexcept {
    return {m11 * theta + m12 * p, m21 * theta + m22 * p};
  }
  OneStepMatrix power(int n) const;
};

/// this * rhs, i.e. rhs is applied first.
OneStepMatrix operator*(const OneStepMatrix& lhs, const OneStepMatrix& rhs);

/// Product of the elementary shears of one step of `scheme` with step eps.
OneStepMatrix one_step_matrix(const IntegratorScheme& scheme, double epsilon);

/// Length of the interval (0, eta) on which |trace| <= 2, located by
/// scanning for the first unstable step-length and bisecting to 1e-10.
double stability_interval_length(const IntegratorScheme& scheme);

/// The one-step matrix equals [[cos a, chi sin a], [-sin a / chi, cos a]].
struct ChiAlpha {
  double chi;
  double alpha;
};

/// chi > 0 and alpha in (-pi, pi) with sin(alpha) of the sign of m12; for
/// small step-lengths alpha lies in (0, pi). Throws OutsideStability when
/// |m11| >= 1 and Error when m12 * m21 >= 0.
ChiAlpha chi_alpha(const IntegratorScheme& scheme, double epsilon);

/// rho(zeta) = (chi - 1/chi)^2 / 2 at scaled step-length zeta.
double rho(const IntegratorScheme& scheme, double zeta);

/// sup of rho over (0, 3). Throws Error when the scheme is not stable on the
/// whole window.
double rho_inf(const IntegratorScheme& scheme);

struct OptimalBResult {
  double b;
  double rho_inf;
  /// (b, rho_inf) for every coefficient evaluated, grid first, then the
  /// Brent refinement in evaluation order.
  std::vector<std::pair<double, double>> trace;
};

/// Minimises rho_inf over the constrained family for b in [b_lo, b_hi].
OptimalBResult optimal_b_search(double b_lo = 0.33, double b_hi = 0.45);
double derive_optimal_b();

}  // namespace splithmc

#endif  // SPLITHMC_STABILITY_HPP
