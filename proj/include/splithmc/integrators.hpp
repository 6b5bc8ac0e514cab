#ifndef SPLITHMC_INTEGRATORS_HPP
#define SPLITHMC_INTEGRATORS_HPP

#include "splithmc/core.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace splithmc {

enum class SchemeLabel { Verlet, LF, B035, BlCaSa, PrEtAl, B040, B045, Custom };

/// Coefficients of the palindromic seven-substep splitting
///
///   kick (1/2-b)e, drift c e, kick b e, drift (1-2c)e, kick b e, drift c e, kick (1/2-b)e
///
/// or, for SchemeLabel::Verlet, the plain kick-drift-kick leapfrog (b and c
/// unused). Members built by `named` or `from_b` satisfy b + c - 6bc = 0.
class IntegratorScheme {
 public:
  static IntegratorScheme verlet();
  static IntegratorScheme named(SchemeLabel label);
  /// Family member with c = c_from_b(b). Reuses a named label when b equals
  /// its coefficient exactly, Custom otherwise.
  static IntegratorScheme from_b(double b);
  /// Arbitrary (b, c); may violate the stability constraint (see
  /// satisfies_constraint()).
  static IntegratorScheme custom(double b, double c);
  /// "lf", "b035", "blcasa", "pretal", "b040", "b045", "verlet", or a
  /// number (interpreted as b). Throws Error on anything else.
  static IntegratorScheme parse(std::string_view text);

  static const std::vector<SchemeLabel>& family_members();

  SchemeLabel label() const noexcept { return label_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  bool is_family() const noexcept { return label_ != SchemeLabel::Verlet; }
  bool satisfies_constraint(double tol = 1e-14) const;
  /// Lower-case identifier as accepted by parse(), "b=<value>" for Custom.
  std::string name() const;

 private:
  IntegratorScheme(SchemeLabel label, double b, double c);
  SchemeLabel label_;
  double b_;
  double c_;
};

bool operator==(const IntegratorScheme& a, const IntegratorScheme& b);

/// Solves b + c - 6bc = 0 for c. Throws Error at b = 1/6.
double c_from_b(double b);

/// Step-length and number of steps of one integration leg.
struct LegSpec {
  LegSpec(double epsilon, int steps);
  double epsilon;
  int steps;
  double tau_end() const noexcept { return epsilon * steps; }
};

/// Raised by integrate_leg when a gradient or state goes non-finite.
class IntegrationError : public NonFiniteValue {
 public:
  IntegrationError(const std::string& what, Vector theta, int step)
      : NonFiniteValue(what, std::move(theta)), step_(step) {}
  /// Zero-based index of the step being taken when the failure occurred.
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// One kick(e/2)-drift(e)-kick(e/2) step. Evaluates the gradient twice.
PhaseState leapfrog_step(const PhaseState& state, const TargetModel& target,
                         const MassMatrix& mass, double epsilon);

/// One step of the splitting family (four gradient evaluations). With
/// scheme == verlet() this is leapfrog_step.
PhaseState family_step(const PhaseState& state, const TargetModel& target,
                       const MassMatrix& mass, double epsilon, const IntegratorScheme& scheme);

struct LegOutcome {
  PhaseState state;
  std::size_t grad_evals;
};

/// L steps, reusing the last gradient of one step as the first of the next:
/// 3L+1 gradient evaluations for the family, L+1 for verlet().
LegOutcome integrate_leg(const PhaseState& state, const TargetModel& target,
                         const MassMatrix& mass, const LegSpec& leg,
                         const IntegratorScheme& scheme);

}  // namespace splithmc

#endif  // SPLITHMC_INTEGRATORS_HPP
