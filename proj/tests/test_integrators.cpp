#include "support.hpp"
#include "splithmc/integrators.hpp"
#include "splithmc/stability.hpp"
#include "splithmc/targets.hpp"

#include <Eigen/LU>
#include <doctest.h>

#include <numbers>

using namespace splithmc;

namespace {

std::vector<IntegratorScheme> family() {
  std::vector<IntegratorScheme> out;
  for (SchemeLabel l : IntegratorScheme::family_members()) out.push_back(IntegratorScheme::named(l));
  return out;
}

PhaseState state1(double th, double p) { return PhaseState(Vector::Constant(1, th), Vector::Constant(1, p)); }

}  // namespace

TEST_SUITE("integrators") {

TEST_CASE("c from b") {
  CHECK(c_from_b(1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(c_from_b(0.45) == doctest::Approx(0.2647058824).epsilon(1e-10));
  CHECK_THROWS_AS(c_from_b(1.0 / 6.0), Error);
}

TEST_CASE("named coefficients") {
  const double expected[] = {1.0 / 3.0, 0.35, 0.38111989033452, 0.391008574596575, 0.40, 0.45};
  const auto schemes = family();
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    CHECK(schemes[i].b() == expected[i]);
    CHECK(schemes[i].satisfies_constraint(1e-14));
    CHECK(schemes[i].is_family());
  }
  CHECK_THROWS_AS(IntegratorScheme::custom(0.0, 0.2), Error);
  CHECK_THROWS_AS(IntegratorScheme::custom(0.5, 0.2), Error);
  CHECK_THROWS_AS(IntegratorScheme::custom(0.3, 0.5), Error);
  CHECK_FALSE(IntegratorScheme::custom(0.3, 0.3).satisfies_constraint());
}

TEST_CASE("scheme parsing") {
  CHECK(IntegratorScheme::parse("BlCaSa").label() == SchemeLabel::BlCaSa);
  CHECK(IntegratorScheme::parse("lf").label() == SchemeLabel::LF);
  CHECK(IntegratorScheme::parse("verlet").label() == SchemeLabel::Verlet);
  CHECK(IntegratorScheme::parse("0.391008574596575").label() == SchemeLabel::PrEtAl);
  const auto custom = IntegratorScheme::parse("b=0.38");
  CHECK(custom.label() == SchemeLabel::Custom);
  CHECK(custom.b() == 0.38);
  CHECK(custom.satisfies_constraint());
  CHECK(IntegratorScheme::parse(custom.name()) == custom);
  CHECK_THROWS_AS(IntegratorScheme::parse("rk4"), Error);
  CHECK_THROWS_AS(IntegratorScheme::parse("0.5"), Error);
}

TEST_CASE("leg spec") {
  CHECK_THROWS_AS(LegSpec(0.0, 3), Error);
  CHECK_THROWS_AS(LegSpec(0.1, 0), Error);
  CHECK(LegSpec(0.25, 8).tau_end() == 2.0);
}

TEST_CASE("leapfrog step by hand") {
  const auto unit = DiagonalGaussianTarget::unit();
  const PhaseState s = leapfrog_step(state1(1.0, 0.0), unit, MassMatrix::identity(), 1.0);
  CHECK(s.theta()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.p()[0] == doctest::Approx(-0.75).epsilon(1e-15));
}

TEST_CASE("zero step is the identity") {
  const auto target = test::QuarticTarget(3);
  RandomStream rng(3);
  const PhaseState s(test::normal_vector(3, rng), test::normal_vector(3, rng));
  for (const auto& scheme : family()) {
    const PhaseState t = family_step(s, target, MassMatrix::identity(), 0.0, scheme);
    CHECK(t.theta() == s.theta());
    CHECK(t.p() == s.p());
  }
}

TEST_CASE("family step matches the one-step matrix") {
  const auto unit = DiagonalGaussianTarget::unit();
  for (const auto& scheme : family()) {
    for (double eps : {0.3, 1.0, 2.2}) {
      const PhaseState s = family_step(state1(1.0, 0.0), unit, MassMatrix::identity(), eps, scheme);
      const OneStepMatrix m = one_step_matrix(scheme, eps);
      CHECK(s.theta()[0] == doctest::Approx(m.m11).epsilon(1e-13));
      CHECK(s.p()[0] == doctest::Approx(m.m21).epsilon(1e-13));
    }
  }
}

TEST_CASE("b = 1/3 equals three leapfrog steps on the Cox target") {
  const CoxModelParams params = CoxModelParams::for_grid(12);
  const CoxTarget cox(params, generate_cox_data(params, 5));
  const auto lf = IntegratorScheme::named(SchemeLabel::LF);
  const MassMatrix id = MassMatrix::identity();
  RandomStream rng(11);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector y = Vector::Constant(cox.dim(), params.mu) + test::normal_vector(cox.dim(), rng, 0.5);
    const PhaseState s(y, test::normal_vector(cox.dim(), rng));
    const double eps = 0.05 + 0.01 * (i % 20);
    const PhaseState a = family_step(s, cox, id, eps, lf);
    PhaseState b = s;
    for (int k = 0; k < 3; ++k) b = leapfrog_step(b, cox, id, eps / 3.0);
    worst = std::max({worst, (a.theta() - b.theta()).cwiseAbs().maxCoeff(), (a.p() - b.p()).cwiseAbs().maxCoeff()});
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gradient evaluations per leg") {
  const auto base = DiagonalGaussianTarget::inverse_index(4);
  test::CountingTarget counting(base);
  RandomStream rng(1);
  const PhaseState s(test::normal_vector(4, rng, 0.2), test::normal_vector(4, rng));
  const auto blcasa = IntegratorScheme::named(SchemeLabel::BlCaSa);
  for (int l : {1, 10, 37}) {
    counting.reset();
    const auto out = integrate_leg(s, counting, MassMatrix::identity(), LegSpec(0.05, l), blcasa);
    CHECK(counting.count() == std::size_t(3 * l + 1));
    CHECK(out.grad_evals == std::size_t(3 * l + 1));
    counting.reset();
    const auto lf = integrate_leg(s, counting, MassMatrix::identity(), LegSpec(0.05, l), IntegratorScheme::verlet());
    CHECK(counting.count() == std::size_t(l + 1));
    CHECK(lf.grad_evals == std::size_t(l + 1));
  }
}

TEST_CASE("non-finite gradient reports the step") {
  const test::CliffTarget cliff(0.5);
  // theta = 0.3 after the first step, 0.573 after the second.
  try {
    integrate_leg(state1(0.0, 1.0), cliff, MassMatrix::identity(), LegSpec(0.3, 10), IntegratorScheme::verlet());
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.step() == 1);
    CHECK(e.theta()[0] == doctest::Approx(0.573));
  }
}

TEST_CASE("time reversibility") {
  const auto unit = DiagonalGaussianTarget::unit();
  const test::QuarticTarget quartic(3);
  RandomStream rng(21);
  auto schemes = family();
  schemes.push_back(IntegratorScheme::verlet());
  for (const auto& scheme : schemes) {
    for (int i = 0; i < 20; ++i) {
      const PhaseState s(test::normal_vector(1, rng), test::normal_vector(1, rng));
      const LegSpec leg(0.4, 7);
      const auto fwd = integrate_leg(s, unit, MassMatrix::identity(), leg, scheme);
      const auto back = integrate_leg(fwd.state.flipped(), unit, MassMatrix::identity(), leg, scheme);
      CHECK((back.state.flipped().theta() - s.theta()).norm() < 1e-10);
      CHECK((back.state.flipped().p() - s.p()).norm() < 1e-10);

      const PhaseState q(test::normal_vector(3, rng), test::normal_vector(3, rng));
      const auto f2 = integrate_leg(q, quartic, MassMatrix::identity(), LegSpec(0.05, 9), scheme);
      const auto b2 = integrate_leg(f2.state.flipped(), quartic, MassMatrix::identity(), LegSpec(0.05, 9), scheme);
      CHECK((b2.state.flipped().theta() - q.theta()).norm() < 1e-10);
    }
  }
}

TEST_CASE("second-order convergence on the oscillator") {
  const auto unit = DiagonalGaussianTarget::unit();
  const double tau = 2.0;
  const double exact_th = std::cos(tau), exact_p = -std::sin(tau);
  auto schemes = family();
  schemes.push_back(IntegratorScheme::verlet());
  for (const auto& scheme : schemes) {
    std::vector<double> errs;
    for (int l : {20, 40, 80, 160}) {
      const auto out = integrate_leg(state1(1.0, 0.0), unit, MassMatrix::identity(), LegSpec(tau / l, l), scheme);
      errs.push_back(std::hypot(out.state.theta()[0] - exact_th, out.state.p()[0] - exact_p));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double slope = std::log2(errs[i - 1] / errs[i]);
      CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
    }
  }
}

TEST_CASE("one step preserves volume on a nonlinear target") {
  const test::QuarticTarget target(4);
  RandomStream rng(4);
  const double h = 1e-6;
  for (const auto& scheme : family()) {
    for (int i = 0; i < 5; ++i) {
      const Vector th = test::normal_vector(4, rng), p = test::normal_vector(4, rng);
      Eigen::Matrix<double, 8, 8> jac;
      for (int k = 0; k < 8; ++k) {
        Vector th_u = th, th_d = th, p_u = p, p_d = p;
        if (k < 4) {
          th_u[k] += h;
          th_d[k] -= h;
        } else {
          p_u[k - 4] += h;
          p_d[k - 4] -= h;
        }
        const PhaseState up = family_step(PhaseState(th_u, p_u), target, MassMatrix::identity(), 0.3, scheme);
        const PhaseState dn = family_step(PhaseState(th_d, p_d), target, MassMatrix::identity(), 0.3, scheme);
        jac.block<4, 1>(0, k) = (up.theta() - dn.theta()) / (2 * h);
        jac.block<4, 1>(4, k) = (up.p() - dn.p()) / (2 * h);
      }
      CHECK(jac.determinant() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

}  // TEST_SUITE

TEST_SUITE("stability") {

TEST_CASE("one-step matrix structure") {
  auto schemes = family();
  schemes.push_back(IntegratorScheme::verlet());
  for (const auto& scheme : schemes) {
    for (double eps = 0.05; eps < 6.0; eps += 0.37) {
      const OneStepMatrix m = one_step_matrix(scheme, eps);
      CHECK(m.det() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(m.m11 - m.m22) < 1e-12 * std::max(1.0, std::abs(m.m11)));
    }
    const double e = 1e-3;
    const OneStepMatrix m = one_step_matrix(scheme, e);
    CHECK(std::abs(m.m11 - std::cos(e)) < 1e-8);
    CHECK(std::abs(m.m12 - std::sin(e)) < 1e-8);
  }
  for (double eps : {0.3, 1.0, 1.7}) {
    CHECK(one_step_matrix(IntegratorScheme::verlet(), eps).trace() == doctest::Approx(2 - eps * eps).epsilon(1e-14));
    const OneStepMatrix lf = one_step_matrix(IntegratorScheme::named(SchemeLabel::LF), eps);
    const OneStepMatrix cube = one_step_matrix(IntegratorScheme::verlet(), eps / 3).power(3);
    CHECK(lf.m11 == doctest::Approx(cube.m11).epsilon(1e-13));
    CHECK(lf.m12 == doctest::Approx(cube.m12).epsilon(1e-13));
    CHECK(lf.m21 == doctest::Approx(cube.m21).epsilon(1e-13));
  }
}

TEST_CASE("stability interval lengths") {
  CHECK(stability_interval_length(IntegratorScheme::verlet()) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(stability_interval_length(IntegratorScheme::named(SchemeLabel::LF)) == doctest::Approx(6.0).epsilon(1e-9));
  // Bisection on |trace| = 2 in 40-digit arithmetic.
  const std::pair<SchemeLabel, double> oracle[] = {{SchemeLabel::B035, 4.96929346598},
                                                   {SchemeLabel::BlCaSa, 4.66184607823},
                                                   {SchemeLabel::PrEtAl, 4.58376792377},
                                                   {SchemeLabel::B040, 4.51848057058},
                                                   {SchemeLabel::B045, 4.2236839575}};
  for (const auto& [label, eta] : oracle) {
    CHECK(std::abs(stability_interval_length(IntegratorScheme::named(label)) - eta) < 1e-8);
  }
}

TEST_CASE("chi and alpha") {
  const ChiAlpha lf = chi_alpha(IntegratorScheme::verlet(), 1.0);
  CHECK(lf.alpha == doctest::Approx(std::numbers::pi / 3).epsilon(1e-14));
  CHECK_THROWS_AS(chi_alpha(IntegratorScheme::verlet(), 2.5), OutsideStability);

  for (const auto& scheme : family()) {
    for (double eps : {0.2, 1.1, 2.9, 4.0}) {
      const OneStepMatrix m = one_step_matrix(scheme, eps);
      const ChiAlpha ca = chi_alpha(scheme, eps);
      CHECK(std::abs(std::cos(ca.alpha) - m.m11) < 1e-10);
      CHECK(std::abs(ca.chi * std::sin(ca.alpha) - m.m12) < 1e-10);
      CHECK(std::abs(-std::sin(ca.alpha) / ca.chi - m.m21) < 1e-10);
      const OneStepMatrix m7 = m.power(7);
      CHECK(std::abs(std::cos(7 * ca.alpha) - m7.m11) < 1e-10);
      CHECK(std::abs(ca.chi * std::sin(7 * ca.alpha) - m7.m12) < 1e-10);
    }
    const double e = 1e-3;
    const ChiAlpha small = chi_alpha(scheme, e);
    CHECK(std::abs(small.chi - 1.0) < 1e-5);
    CHECK(std::abs(small.alpha / e - 1.0) < 1e-5);
  }
}

TEST_CASE("rho") {
  const auto verlet = IntegratorScheme::verlet();
  CHECK(rho(verlet, 1.0) == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
  CHECK(rho(verlet, 0.5) == doctest::Approx(1.0 / 480.0).epsilon(1e-13));
  CHECK_THROWS_AS(rho(verlet, 2.1), OutsideStability);
  for (const auto& scheme : family()) {
    // O(zeta^4) in general. PrEtAl's b kills the leading term of chi - 1, leaving O(zeta^8).
    const double r1 = rho(scheme, 0.02), r2 = rho(scheme, 0.01);
    const double order = scheme.label() == SchemeLabel::PrEtAl ? 256.0 : 16.0;
    CHECK(r1 / r2 == doctest::Approx(order).epsilon(0.01));
    CHECK(r2 >= 0.0);
  }
}

TEST_CASE("rho_inf and the optimal coefficient") {
  CHECK_THROWS_AS(rho_inf(IntegratorScheme::verlet()), Error);
  CHECK(rho_inf(IntegratorScheme::named(SchemeLabel::LF)) == doctest::Approx(1.0 / 24.0).epsilon(1e-9));
  const double best = rho_inf(IntegratorScheme::named(SchemeLabel::BlCaSa));
  for (const auto& scheme : family()) CHECK(rho_inf(scheme) >= best);

  const OptimalBResult r = optimal_b_search(0.33, 0.45);
  CHECK(std::abs(r.b - 0.38111989033452) < 1e-6);
  CHECK(r.b >= 0.33);
  CHECK(r.b <= 0.45);
  CHECK(r.rho_inf <= rho_inf(IntegratorScheme::from_b(r.b - 0.01)));
  CHECK(r.rho_inf <= rho_inf(IntegratorScheme::from_b(r.b + 0.01)));
  CHECK(r.trace.size() > 241);
}

}  // TEST_SUITE
