#include "support.hpp"
#include "splithmc/integrators.hpp"
#include "splithmc/targets.hpp"
#include "splithmc/theory.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <set>

using namespace splithmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("splithmc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("streams are reproducible") {
  RandomStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs |= x != c();
  }
  CHECK(differs);
  CHECK(a.counter() == 100);
}

TEST_CASE("substreams") {
  const RandomStream root(7);
  RandomStream m1 = root.substream("momentum"), m2 = root.substream("momentum");
  RandomStream j = root.substream("jitter"), i0 = root.substream(0), i1 = root.substream(1);
  CHECK(root.counter() == 0);
  std::set<std::uint64_t> firsts;
  CHECK(m1() == m2());
  firsts.insert(m1());
  firsts.insert(j());
  firsts.insert(i0());
  firsts.insert(i1());
  CHECK(firsts.size() == 4);
  // Derivation depends on the key only, not on how far the parent has run.
  RandomStream advanced(7);
  for (int k = 0; k < 10; ++k) advanced();
  RandomStream m3 = advanced.substream("momentum");
  RandomStream m4 = root.substream("momentum");
  CHECK(m3() == m4());
}

TEST_CASE("uniform moments and bit balance") {
  RandomStream rng(2024);
  std::uniform_real_distribution<double> u;
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    s += x;
    s2 += x * x;
    ones += std::popcount(rng());
  }
  CHECK(std::abs(s / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.005);
  CHECK(std::abs(ones / (64.0 * n) - 0.5) < 5 * 0.5 / std::sqrt(64.0 * n));
}

}  // TEST_SUITE

TEST_SUITE("targets") {

TEST_CASE("diagonal gaussian") {
  CHECK_THROWS_AS(DiagonalGaussianTarget(Vector::Zero(2)), Error);
  CHECK_THROWS_AS(DiagonalGaussianTarget(Vector(0)), Error);
  const auto g = DiagonalGaussianTarget::inverse_index(4);
  CHECK(g.sigmas()[3] == 0.25);
  const Vector th = Vector::Ones(4);
  CHECK(g.log_density(th) == doctest::Approx(-0.5 * (1 + 4 + 9 + 16)));
  CHECK(g.grad_log_density(th)[2] == doctest::Approx(-9.0));
  RandomStream rng(1);
  for (int i = 0; i < 20; ++i) CHECK(test::gradient_fd_error(g, test::normal_vector(4, rng)) < 1e-7);
}

TEST_CASE("exact draws pass a KS test") {
  const auto g = DiagonalGaussianTarget::inverse_index(3);
  RandomStream rng(99);
  const int n = 5000;
  std::vector<double> z;
  for (int i = 0; i < n; ++i) z.push_back(gaussian_exact_draw(g, rng)[2] * 3.0);
  std::sort(z.begin(), z.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = normal_cdf(z[i]);
    ks = std::max({ks, f - double(i) / n, double(i + 1) / n - f});
  }
  CHECK(ks < 1.63 / std::sqrt(double(n)));  // 1% level
}

TEST_CASE("cox kernel") {
  CoxModelParams p = CoxModelParams::for_grid(8);
  p.beta = 8.0 / 33.0;  // same lattice scale as the 64 x 64 model
  const CoxCovariance cov = build_cox_covariance(p);
  CHECK(cov.sigma(0, 0) == doctest::Approx(1.91).epsilon(1e-15));
  CHECK(cov.sigma(0, 1) == doctest::Approx(1.91 * std::exp(-33.0 / 64.0)).epsilon(1e-14));
  CHECK(cov.sigma(0, 8) == doctest::Approx(1.91 * std::exp(-33.0 / 64.0)).epsilon(1e-14));
  CHECK(cov.sigma(0, 9) == doctest::Approx(1.91 * std::exp(-std::sqrt(2.0) * 33.0 / 64.0)).epsilon(1e-14));
  CHECK((cov.sigma - cov.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((cov.chol * cov.chol.transpose() - cov.sigma).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cov.chol.triangularView<Eigen::StrictlyUpper>().toDenseMatrix()).cwiseAbs().maxCoeff() == 0.0);

  CoxModelParams bad = p;
  bad.beta = -1.0;
  CHECK_THROWS_AS(build_cox_covariance(bad), Error);
  CHECK(p.hash() != bad.hash());
  CHECK(CoxModelParams{}.dim() == 4096);
  CHECK(CoxModelParams{}.mu == doctest::Approx(std::log(126.0) - 0.955));
}

TEST_CASE("cox posterior") {
  const CoxModelParams p = CoxModelParams::for_grid(8);
  const CoxTarget cox(p, generate_cox_data(p, 3));
  RandomStream rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vector y = Vector::Constant(64, p.mu) + test::normal_vector(64, rng);
    CHECK(test::gradient_fd_error(cox, y, 1e-5) < 1e-6);
    const Vector v = test::normal_vector(64, rng);
    const Vector a = cox.apply_precision(v), b = cox.solve_covariance(v);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff()));
  }
  CHECK_THROWS_AS(CoxTarget(p, Eigen::VectorXi::Zero(10)), DimensionMismatch);
}

TEST_CASE("cox initial state is a fixed point") {
  const CoxModelParams p = CoxModelParams::for_grid(8);
  const CoxTarget cox(p, generate_cox_data(p, 3));
  const CoxInitialState zero = cox_initial_state(cox, Vector::Zero(64));
  CHECK((zero.y - Vector::Constant(64, p.mu)).cwiseAbs().maxCoeff() < 1e-12);

  RandomStream rng(8);
  const Vector gamma = test::normal_vector(64, rng);
  // diag(y) is only a valid precision term while y > 0, so the literal map gets a small Gamma.
  for (auto [variant, g] : {std::pair{CoxInitVariant::Curvature, gamma}, std::pair{CoxInitVariant::Literal, Vector(0.1 * gamma)}}) {
    const CoxInitialState s = cox_initial_state(cox, g, variant);
    const Vector residual = s.y - Vector::Constant(64, p.mu) - cox_fixed_point_map(cox, s.y, g, variant);
    CHECK(residual.norm() < 1e-10);
    CHECK(s.last_step < 1e-12);
  }
  const CoxInitialState a = cox_initial_state(cox, 11), b = cox_initial_state(cox, 11);
  CHECK(a.y == b.y);
}

TEST_CASE("cox data generation") {
  const CoxModelParams p = CoxModelParams::for_grid(8);
  CHECK(generate_cox_data(p, 1) == generate_cox_data(p, 1));
  CHECK(generate_cox_data(p, 1) != generate_cox_data(p, 2));
  CHECK(generate_cox_data(p, 1).minCoeff() >= 0);
  // E sum x = sum m E exp(y) = exp(mu + sigma2/2) = 126 for unit total area.
  const Matrix chol = cox_covariance_factor(p);
  double total = 0.0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) total += generate_cox_data(p, chol, 100 + s).sum();
  CHECK(std::abs(total / seeds - 126.0) < 25.0);
}

TEST_CASE("dataset and factor files round-trip") {
  const fs::path dir = scratch_dir("cox_files");
  const CoxModelParams p = CoxModelParams::for_grid(6);
  const CoxDataset data{p, 17, generate_cox_data(p, 17)};
  write_cox_dataset(dir / "d.txt", data);
  const CoxDataset back = read_cox_dataset(dir / "d.txt");
  CHECK(back.counts == data.counts);
  CHECK(back.seed == 17);
  CHECK(back.params.hash() == p.hash());

  const Matrix chol = cox_covariance_factor(p);
  write_cholesky_cache(dir / "c.bin", p, chol);
  const auto cached = read_cholesky_cache(dir / "c.bin", p);
  REQUIRE(cached.has_value());
  CHECK(*cached == chol);
  CHECK_FALSE(read_cholesky_cache(dir / "c.bin", CoxModelParams::for_grid(5)).has_value());
  CHECK_FALSE(read_cholesky_cache(dir / "missing.bin", p).has_value());

  std::ofstream(dir / "junk.txt") << "not a dataset\n";
  CHECK_THROWS_AS(read_cox_dataset(dir / "junk.txt"), Error);

  const CoxTarget t1 = load_or_create_cox_target(dir / "lazy.txt", p, 4);
  CHECK(fs::exists(dir / "lazy.txt"));
  CHECK(fs::exists(dir / "lazy.txt.chol"));
  const CoxTarget t2 = load_or_create_cox_target(dir / "lazy.txt", p, 999);
  CHECK(t1.counts() == t2.counts());
  CHECK(t1.chol() == t2.chol());
  fs::remove_all(dir);
}

TEST_CASE("integration commutes with rescaling") {
  // A leg on N(0, sigma^2) at step eps is a leg on N(0, 1) at eps/sigma in theta/sigma.
  const double sigma = 0.3;
  const DiagonalGaussianTarget g(Vector::Constant(1, sigma));
  const auto unit = DiagonalGaussianTarget::unit();
  const auto scheme = IntegratorScheme::named(SchemeLabel::BlCaSa);
  const PhaseState s(Vector::Constant(1, 0.2), Vector::Constant(1, -0.7));
  const auto a = integrate_leg(s, g, MassMatrix::identity(), LegSpec(0.1, 13), scheme);
  const PhaseState su(s.theta() / sigma, s.p());
  const auto b = integrate_leg(su, unit, MassMatrix::identity(), LegSpec(0.1 / sigma, 13), scheme);
  CHECK(a.state.theta()[0] == doctest::Approx(b.state.theta()[0] * sigma).epsilon(1e-12));
  CHECK(a.state.p()[0] == doctest::Approx(b.state.p()[0]).epsilon(1e-12));
}

}  // TEST_SUITE
