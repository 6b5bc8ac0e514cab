#include "splithmc/stability.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

namespace splithmc {
namespace {

OneStepMatrix kick(double h) { return OneStepMatrix{1.0, 0.0, -h, 1.0}; }
OneStepMatrix drift(double h) { return OneStepMatrix{1.0, h, 0.0, 1.0}; }

// Slack on |trace| - 2: tangential contacts inside the interval (where the
// matrix is +-I) must not read as instability.
constexpr double kTraceSlack = 1e-10;

bool unstable(const IntegratorScheme& scheme, double eps) {
  return std::abs(one_step_matrix(scheme, eps).trace()) > 2.0 + kTraceSlack;
}

constexpr double kWindow = 3.0;
constexpr int kWindowGrid = 10000;
constexpr int kBrentBits = std::numeric_limits<double>::digits;

// rho at zeta; at an isolated point where the matrix is +-I the ratio
// m12/m21 is 0/0, so the limit is extrapolated from the left.
double rho_or_limit(const IntegratorScheme& scheme, double zeta) {
  try {
    return rho(scheme, zeta);
  } catch (const Error&) {
    if (unstable(scheme, zeta)) throw;
    const double h = 1e-6 * zeta;
    return 2.0 * rho(scheme, zeta - h) - rho(scheme, zeta - 2.0 * h);
  }
}

double refine_max(const IntegratorScheme& scheme, double lo, double hi) {
  std::uintmax_t iters = 200;
  const auto [arg, neg] = boost::math::tools::brent_find_minima(
      [&](double z) { return -rho_or_limit(scheme, z); }, lo, hi, kBrentBits, iters);
  (void)arg;
  return -neg;
}

}  // namespace

OneStepMatrix operator*(const OneStepMatrix& a, const OneStepMatrix& b) {
  return OneStepMatrix{a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                       a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

OneStepMatrix OneStepMatrix::power(int n) const {
  if (n < 0) throw Error("matrix power: negative exponent");
  OneStepMatrix result;
  OneStepMatrix base = *this;
  while (n > 0) {
    if (n & 1) result = base * result;
    base = base * base;
    n >>= 1;
  }
  return result;
}

OneStepMatrix one_step_matrix(const IntegratorScheme& scheme, double eps) {
  if (!scheme.is_family()) return kick(0.5 * eps) * drift(eps) * kick(0.5 * eps);
  const double b = scheme.b();
  const double c = scheme.c();
  const OneStepMatrix outer = kick((0.5 - b) * eps);
  return outer * drift(c * eps) * kick(b * eps) * drift((1.0 - 2.0 * c) * eps) *
         kick(b * eps) * drift(c * eps) * outer;
}

double stability_interval_length(const IntegratorScheme& scheme) {
  constexpr double kScanStep = 1e-4;
  constexpr double kScanMax = 50.0;
  double good = 0.0;
  double bad = -1.0;
  for (double eps = kScanStep; eps <= kScanMax; eps += kScanStep) {
    if (unstable(scheme, eps)) {
      bad = eps;
      break;
    }
    good = eps;
  }
  if (bad < 0.0) throw Error("no instability found below step-length 50 for " + scheme.name());
  while (bad - good > 1e-10) {
    const double mid = 0.5 * (good + bad);
    (unstable(scheme, mid) ? bad : good) = mid;
  }
  return good;
}

ChiAlpha chi_alpha(const IntegratorScheme& scheme, double eps) {
  const OneStepMatrix m = one_step_matrix(scheme, eps);
  if (!(std::abs(m.m11) < 1.0)) {
    throw OutsideStability("step-length " + std::to_string(eps) +
                           " is outside the stability interval of " + scheme.name());
  }
  const double prod = m.m12 * m.m21;
  if (!(prod < 0.0)) {
    throw Error("degenerate one-step matrix at step-length " + std::to_string(eps));
  }
  const double s = std::sqrt(-prod);
  const double alpha = std::atan2(m.m12 > 0.0 ? s : -s, m.m11);
  return ChiAlpha{std::sqrt(m.m12 / -m.m21), alpha};
}

double rho(const IntegratorScheme& scheme, double zeta) {
  if (!(zeta > 0.0)) throw Error("rho: scaled step-length must be positive");
  const ChiAlpha ca = chi_alpha(scheme, zeta);
  const double d = ca.chi - 1.0 / ca.chi;
  return 0.5 * d * d;
}

double rho_inf(const IntegratorScheme& scheme) {
  if (stability_interval_length(scheme) <= kWindow) {
    throw Error("scheme " + scheme.name() + " is unstable within the optimisation window (0, 3)");
  }
  std::vector<double> zeta(kWindowGrid + 1), value(kWindowGrid + 1, -1.0);
  for (int k = 1; k <= kWindowGrid; ++k) {
    zeta[k] = kWindow * k / kWindowGrid;
    try {
      value[k] = rho(scheme, zeta[k]);
    } catch (const Error&) {
      value[k] = -1.0;
    }
  }
  double best = rho_or_limit(scheme, kWindow);
  for (int k = 2; k < kWindowGrid; ++k) {
    if (value[k] >= 0.0 && value[k] >= value[k - 1] && value[k] >= value[k + 1]) {
      best = std::max(best, refine_max(scheme, zeta[k - 1], zeta[k + 1]));
    }
  }
  // rho is increasing near 0, so a peak in the first cell is impossible; a
  // maximum at the right end is the endpoint value handled above.
  return best;
}

OptimalBResult optimal_b_search(double b_lo, double b_hi) {
  constexpr int kGrid = 240;
  OptimalBResult out{};
  auto eval = [&](double b) {
    const double r = rho_inf(IntegratorScheme::from_b(b));
    out.trace.emplace_back(b, r);
    return r;
  };
  int best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> grid(kGrid + 1);
  for (int k = 0; k <= kGrid; ++k) {
    grid[k] = b_lo + (b_hi - b_lo) * k / kGrid;
    const double r = eval(grid[k]);
    if (r < best) {
      best = r;
      best_k = k;
    }
  }
  const double lo = grid[std::max(best_k - 1, 0)];
  const double hi = grid[std::min(best_k + 1, kGrid)];
  std::uintmax_t iters = 200;
  const auto [b, r] =
      boost::math::tools::brent_find_minima(eval, lo, hi, kBrentBits, iters);
  out.b = b;
  out.rho_inf = r;
  return out;
}

double derive_optimal_b() { return optimal_b_search().b; }

}  // namespace splithmc
