#include "splithmc/integrators.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace splithmc {
namespace {

constexpr double kB035 = 0.35;
constexpr double kBlCaSa = 0.38111989033452;
constexpr double kPrEtAl = 0.391008574596575;
constexpr double kB040 = 0.40;
constexpr double kB045 = 0.45;

double named_b(SchemeLabel label) {
  switch (label) {
    case SchemeLabel::LF: return 1.0 / 3.0;
    case SchemeLabel::B035: return kB035;
    case SchemeLabel::BlCaSa: return kBlCaSa;
    case SchemeLabel::PrEtAl: return kPrEtAl;
    case SchemeLabel::B040: return kB040;
    case SchemeLabel::B045: return kB045;
    default: throw Error("scheme label has no fixed coefficient");
  }
}

void check_coefficient(double v, const char* name) {
  if (!std::isfinite(v) || v == 0.0 || v == 0.5) {
    throw Error(std::string("integrator coefficient ") + name + " must be finite and not 0 or 1/2");
  }
}

// Carries the most recent gradient so consecutive steps share it.
class Stepper {
 public:
  Stepper(const TargetModel& target, const MassMatrix& mass) : target_(target), mass_(mass) {}

  void evaluate(const Vector& theta, int step) {
    target_.grad_log_density(theta, grad_);
    ++evals_;
    if (!all_finite(grad_)) throw IntegrationError("non-finite gradient", theta, step);
  }
  void kick(Vector& p, double h) const { p.noalias() += h * grad_; }
  void drift(Vector& theta, const Vector& p, double h) const { mass_.drift(theta, p, h); }

  // Both assume grad_ holds the gradient at theta on entry and leave it
  // holding the gradient at the updated theta.
  void leapfrog(Vector& theta, Vector& p, double eps, int step) {
    kick(p, 0.5 * eps);
    drift(theta, p, eps);
    evaluate(theta, step);
    kick(p, 0.5 * eps);
  }
  void family(Vector& theta, Vector& p, double eps, double b, double c, int step) {
    const double outer = (0.5 - b) * eps;
    kick(p, outer);
    drift(theta, p, c * eps);
    evaluate(theta, step);
    kick(p, b * eps);
    drift(theta, p, (1.0 - 2.0 * c) * eps);
    evaluate(theta, step);
    kick(p, b * eps);
    drift(theta, p, c * eps);
    evaluate(theta, step);
    kick(p, outer);
  }

  std::size_t evals() const noexcept { return evals_; }

 private:
  const TargetModel& target_;
  const MassMatrix& mass_;
  Vector grad_;
  std::size_t evals_ = 0;
};

void check_dims(const PhaseState& state, const TargetModel& target, const MassMatrix& mass) {
  if (state.dim() != target.dim()) {
    throw DimensionMismatch("state dimension " + std::to_string(state.dim()) +
                            " does not match target dimension " + std::to_string(target.dim()));
  }
  mass.check_dim(state.dim());
}

}  // namespace

IntegratorScheme::IntegratorScheme(SchemeLabel label, double b, double c)
    : label_(label), b_(b), c_(c) {}

IntegratorScheme IntegratorScheme::verlet() {
  return IntegratorScheme(SchemeLabel::Verlet, std::nan(""), std::nan(""));
}

IntegratorScheme IntegratorScheme::named(SchemeLabel label) {
  if (label == SchemeLabel::Verlet) return verlet();
  if (label == SchemeLabel::Custom) throw Error("Custom scheme needs explicit coefficients");
  const double b = named_b(label);
  return IntegratorScheme(label, b, c_from_b(b));
}

IntegratorScheme IntegratorScheme::from_b(double b) {
  for (SchemeLabel label : family_members()) {
    if (named_b(label) == b) return named(label);
  }
  check_coefficient(b, "b");
  const double c = c_from_b(b);
  check_coefficient(c, "c");
  return IntegratorScheme(SchemeLabel::Custom, b, c);
}

IntegratorScheme IntegratorScheme::custom(double b, double c) {
  check_coefficient(b, "b");
  check_coefficient(c, "c");
  return IntegratorScheme(SchemeLabel::Custom, b, c);
}

IntegratorScheme IntegratorScheme::parse(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (ch != ' ' && ch != '\t') s.push_back(static_cast<char>(std::tolower(ch)));
  }
  if (s == "lf") return named(SchemeLabel::LF);
  if (s == "b035") return named(SchemeLabel::B035);
  if (s == "blcasa") return named(SchemeLabel::BlCaSa);
  if (s == "pretal") return named(SchemeLabel::PrEtAl);
  if (s == "b040") return named(SchemeLabel::B040);
  if (s == "b045") return named(SchemeLabel::B045);
  if (s == "verlet" || s == "leapfrog") return verlet();
  std::string_view num = s;
  if (num.starts_with("b=")) num.remove_prefix(2);
  double b = 0.0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), b);
  if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
    throw Error("unknown integrator scheme '" + std::string(text) + "'");
  }
  return from_b(b);
}

const std::vector<SchemeLabel>& IntegratorScheme::family_members() {
  static const std::vector<SchemeLabel> labels = {SchemeLabel::LF,     SchemeLabel::B035,
                                                  SchemeLabel::BlCaSa, SchemeLabel::PrEtAl,
                                                  SchemeLabel::B040,   SchemeLabel::B045};
  return labels;
}

bool IntegratorScheme::satisfies_constraint(double tol) const {
  if (!is_family()) return false;
  return std::abs(b_ + c_ - 6.0 * b_ * c_) <= tol;
}

std::string IntegratorScheme::name() const {
  switch (label_) {
    case SchemeLabel::Verlet: return "verlet";
    case SchemeLabel::LF: return "lf";
    case SchemeLabel::B035: return "b035";
    case SchemeLabel::BlCaSa: return "blcasa";
    case SchemeLabel::PrEtAl: return "pretal";
    case SchemeLabel::B040: return "b040";
    case SchemeLabel::B045: return "b045";
    case SchemeLabel::Custom: break;
  }
  std::ostringstream os;
  os.precision(17);
  os << "b=" << b_;
  return os.str();
}

bool operator==(const IntegratorScheme& a, const IntegratorScheme& b) {
  if (a.label() != b.label()) return false;
  if (!a.is_family()) return true;
  return a.b() == b.b() && a.c() == b.c();
}

double c_from_b(double b) {
  const double denom = 6.0 * b - 1.0;
  if (denom == 0.0) throw Error("b = 1/6 admits no c with b + c - 6bc = 0");
  return b / denom;
}

LegSpec::LegSpec(double eps, int l) : epsilon(eps), steps(l) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error("leg: step-length must be positive");
  if (l < 1) throw Error("leg: number of steps must be at least 1");
}

PhaseState leapfrog_step(const PhaseState& state, const TargetModel& target,
                         const MassMatrix& mass, double epsilon) {
  return family_step(state, target, mass, epsilon, IntegratorScheme::verlet());
}

PhaseState family_step(const PhaseState& state, const TargetModel& target,
                       const MassMatrix& mass, double epsilon, const IntegratorScheme& scheme) {
  check_dims(state, target, mass);
  Vector theta = state.theta();
  Vector p = state.p();
  Stepper stepper(target, mass);
  stepper.evaluate(theta, 0);
  if (scheme.is_family()) {
    stepper.family(theta, p, epsilon, scheme.b(), scheme.c(), 0);
  } else {
    stepper.leapfrog(theta, p, epsilon, 0);
  }
  return PhaseState(std::move(theta), std::move(p));
}

LegOutcome integrate_leg(const PhaseState& state, const TargetModel& target,
                         const MassMatrix& mass, const LegSpec& leg,
                         const IntegratorScheme& scheme) {
  check_dims(state, target, mass);
  Vector theta = state.theta();
  Vector p = state.p();
  Stepper stepper(target, mass);
  stepper.evaluate(theta, 0);
  if (scheme.is_family()) {
    for (int n = 0; n < leg.steps; ++n) {
      stepper.family(theta, p, leg.epsilon, scheme.b(), scheme.c(), n);
    }
  } else {
    for (int n = 0; n < leg.steps; ++n) stepper.leapfrog(theta, p, leg.epsilon, n);
  }
  if (!all_finite(p) || !all_finite(theta)) {
    throw IntegrationError("non-finite state at end of leg", theta, leg.steps - 1);
  }
  return LegOutcome{PhaseState(std::move(theta), std::move(p)), stepper.evals()};
}

}  // namespace splithmc
