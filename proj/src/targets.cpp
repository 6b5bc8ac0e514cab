#include "splithmc/targets.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace splithmc {

// --- diagonal Gaussian -------------------------------------------------------

DiagonalGaussianTarget::DiagonalGaussianTarget(Vector sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.size() < 1) throw Error("diagonal Gaussian: dimension must be at least 1");
  for (Eigen::Index i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) {
      throw Error("diagonal Gaussian: standard deviations must be positive and finite");
    }
  }
  inv_var_ = sigmas_.cwiseAbs2().cwiseInverse();
}

DiagonalGaussianTarget DiagonalGaussianTarget::inverse_index(Eigen::Index d) {
  if (d < 1) throw Error("diagonal Gaussian: dimension must be at least 1");
  Vector s(d);
  for (Eigen::Index j = 0; j < d; ++j) s[j] = 1.0 / double(j + 1);
  return DiagonalGaussianTarget(std::move(s));
}

DiagonalGaussianTarget DiagonalGaussianTarget::unit() {
  return DiagonalGaussianTarget(Vector::Ones(1));
}

double DiagonalGaussianTarget::log_density(const Vector& theta) const {
  return -0.5 * theta.cwiseAbs2().dot(inv_var_);
}

void DiagonalGaussianTarget::grad_log_density(const Vector& theta, Vector& grad) const {
  grad = -theta.cwiseProduct(inv_var_);
}

Vector gaussian_exact_draw(const DiagonalGaussianTarget& target, RandomStream& rng) {
  std::normal_distribution<double> normal;
  Vector theta(target.dim());
  for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = target.sigmas()[j] * normal(rng);
  return theta;
}

// --- Cox model ---------------------------------------------------------------

void CoxModelParams::validate() const {
  if (grid_n < 1) throw Error("cox: grid_n must be positive");
  if (!(beta > 0.0)) throw Error("cox: beta must be positive");
  if (!(sigma2 > 0.0)) throw Error("cox: sigma2 must be positive");
  if (!std::isfinite(mu)) throw Error("cox: mu must be finite");
  if (!(cell_area > 0.0)) throw Error("cox: cell_area must be positive");
}

std::uint64_t CoxModelParams::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t n = grid_n;
  feed(&n, sizeof n);
  for (double v : {beta, sigma2, mu, cell_area}) feed(&v, sizeof v);
  return h;
}

CoxModelParams CoxModelParams::for_grid(int n) {
  CoxModelParams p;
  p.grid_n = n;
  p.cell_area = 1.0 / (double(n) * n);
  return p;
}

namespace {

Matrix covariance_matrix(const CoxModelParams& params) {
  params.validate();
  const int n = params.grid_n;
  const Eigen::Index d = params.dim();
  const double scale = 1.0 / (n * params.beta);
  // The kernel depends on |i - i'|, |j - j'| only.
  Matrix table(n, n);
  for (int di = 0; di < n; ++di) {
    for (int dj = 0; dj < n; ++dj) {
      table(di, dj) = params.sigma2 * std::exp(-std::sqrt(double(di * di + dj * dj)) * scale);
    }
  }
  Matrix sigma(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const int i = int(a / n), j = int(a % n);
    for (Eigen::Index b = 0; b < d; ++b) {
      const int k = int(b / n), l = int(b % n);
      sigma(a, b) = table(std::abs(i - k), std::abs(j - l));
    }
  }
  return sigma;
}

}  // namespace

CoxCovariance build_cox_covariance(const CoxModelParams& params) {
  CoxCovariance out;
  out.sigma = covariance_matrix(params);
  Eigen::LLT<Matrix> llt(out.sigma);
  if (llt.info() != Eigen::Success) throw Error("cox: Cholesky factorisation of Sigma failed");
  out.chol = llt.matrixL();
  return out;
}

Matrix cox_covariance_factor(const CoxModelParams& params) {
  Matrix m = covariance_matrix(params);
  Eigen::LLT<Eigen::Ref<Matrix>> llt(m);
  if (llt.info() != Eigen::Success) throw Error("cox: Cholesky factorisation of Sigma failed");
  m.triangularView<Eigen::StrictlyUpper>().setZero();
  return m;
}

CoxTarget::CoxTarget(CoxModelParams params, Eigen::VectorXi counts)
    : CoxTarget(params, std::move(counts), cox_covariance_factor(params)) {}

CoxTarget::CoxTarget(CoxModelParams params, Eigen::VectorXi counts, Matrix chol)
    : params_(params), counts_(std::move(counts)), chol_(std::move(chol)) {
  params_.validate();
  const Eigen::Index d = params_.dim();
  if (counts_.size() != d) {
    throw DimensionMismatch("cox: expected " + std::to_string(d) + " counts, got " +
                            std::to_string(counts_.size()));
  }
  if ((counts_.array() < 0).any()) throw Error("cox: counts must be nonnegative");
  if (chol_.rows() != d || chol_.cols() != d) throw DimensionMismatch("cox: factor has wrong size");
  counts_d_ = counts_.cast<double>();
  // Sigma^{-1} = L^{-T} L^{-1}
  Matrix linv = Matrix::Identity(d, d);
  chol_.triangularView<Eigen::Lower>().solveInPlace(linv);
  precision_ = Matrix::Zero(d, d);
  precision_.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());
  precision_.triangularView<Eigen::StrictlyUpper>() = precision_.transpose();
}

double CoxTarget::log_density(const Vector& y) const {
  const Vector r = y.array() - params_.mu;
  const Vector qr = apply_precision(r);
  const double lik = counts_d_.dot(y) - params_.cell_area * y.array().exp().sum();
  return lik - 0.5 * r.dot(qr);
}

void CoxTarget::grad_log_density(const Vector& y, Vector& grad) const {
  const Vector r = y.array() - params_.mu;
  grad = counts_d_ - params_.cell_area * y.array().exp().matrix();
  grad.noalias() -= precision_.selfadjointView<Eigen::Lower>() * r;
}

Vector CoxTarget::apply_precision(const Vector& v) const {
  Vector out(v.size());
  out.noalias() = precision_.selfadjointView<Eigen::Lower>() * v;
  return out;
}

Vector CoxTarget::solve_covariance(const Vector& v) const {
  Vector w = chol_.triangularView<Eigen::Lower>().solve(v);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(w);
  return w;
}

Eigen::VectorXi generate_cox_data(const CoxModelParams& params, const Matrix& chol,
                                  std::uint64_t seed) {
  params.validate();
  const Eigen::Index d = params.dim();
  RandomStream root(seed);
  RandomStream field_rng = root.substream("cox-field");
  RandomStream count_rng = root.substream("cox-counts");
  std::normal_distribution<double> normal;
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(field_rng);
  const Vector y = (chol.triangularView<Eigen::Lower>() * z).array() + params.mu;
  Eigen::VectorXi x(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    std::poisson_distribution<int> poisson(params.cell_area * std::exp(y[i]));
    x[i] = poisson(count_rng);
  }
  return x;
}

Eigen::VectorXi generate_cox_data(const CoxModelParams& params, std::uint64_t seed) {
  return generate_cox_data(params, cox_covariance_factor(params), seed);
}

Vector cox_fixed_point_map(const CoxTarget& target, const Vector& y, const Vector& gamma,
                           CoxInitVariant variant) {
  // The lower Cholesky factor of P^{-1} is J R^{-T} J with R R^T = J P J and J
  // the exchange matrix, so one factorisation of the reversed matrix suffices.
  const Eigen::Index d = target.dim();
  const Matrix& q = target.precision();
  const double m = target.params().cell_area;
  Matrix rev(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) rev(i, j) = q(d - 1 - j, d - 1 - i);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const double yi = y[d - 1 - i];
    rev(i, i) += variant == CoxInitVariant::Curvature ? m * std::exp(yi) : yi;
  }
  Eigen::LLT<Eigen::Ref<Matrix>> llt(rev);
  if (llt.info() != Eigen::Success) {
    throw Error("cox initial state: Sigma^{-1} + diag(w(y)) is not positive definite");
  }
  Vector w = gamma.reverse();
  llt.matrixU().solveInPlace(w);
  return w.reverse();
}

CoxInitialState cox_initial_state(const CoxTarget& target, const Vector& gamma,
                                  CoxInitVariant variant, double tol, int max_iter) {
  if (gamma.size() != target.dim()) throw DimensionMismatch("cox initial state: Gamma has wrong size");
  const Vector base = Vector::Constant(target.dim(), target.params().mu);
  Vector y = base;
  double step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    Vector next = base + cox_fixed_point_map(target, y, gamma, variant);
    step = (next - y).norm();
    y = std::move(next);
    if (step < tol) return CoxInitialState{std::move(y), it, step};
  }
  std::ostringstream os;
  os << "cox initial state: no convergence in " << max_iter << " iterations (last step " << step
     << ")";
  throw Error(os.str());
}

CoxInitialState cox_initial_state(const CoxTarget& target, std::uint64_t seed,
                                  CoxInitVariant variant) {
  RandomStream rng = RandomStream(seed).substream("cox-init");
  std::normal_distribution<double> normal;
  Vector gamma(target.dim());
  for (Eigen::Index i = 0; i < gamma.size(); ++i) gamma[i] = normal(rng);
  return cox_initial_state(target, gamma, variant);
}

// --- files -------------------------------------------------------------------

namespace {

constexpr const char* kDatasetMagic = "# splithmc cox dataset v1";
constexpr std::array<char, 8> kCholMagic = {'S', 'H', 'M', 'C', 'C', 'H', 'O', 'L'};

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T read_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

void write_cox_dataset(const std::filesystem::path& path, const CoxDataset& data) {
  const auto& p = data.params;
  if (data.counts.size() != p.dim()) throw DimensionMismatch("cox dataset: wrong number of counts");
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os.precision(17);
  os << kDatasetMagic << '\n'
     << "grid_n " << p.grid_n << '\n'
     << "beta " << p.beta << '\n'
     << "sigma2 " << p.sigma2 << '\n'
     << "mu " << p.mu << '\n'
     << "cell_area " << p.cell_area << '\n'
     << "seed " << data.seed << '\n';
  for (int i = 0; i < p.grid_n; ++i) {
    for (int j = 0; j < p.grid_n; ++j) {
      os << data.counts[i * p.grid_n + j] << (j + 1 < p.grid_n ? ' ' : '\n');
    }
  }
  if (!os) throw Error("error writing " + path.string());
}

CoxDataset read_cox_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != kDatasetMagic) throw Error(path.string() + ": not a cox dataset file");
  CoxDataset data;
  auto& p = data.params;
  for (const char* key : {"grid_n", "beta", "sigma2", "mu", "cell_area", "seed"}) {
    std::string name;
    is >> name;
    if (name != key) throw Error(path.string() + ": expected header field '" + key + "'");
    if (name == "grid_n") is >> p.grid_n;
    else if (name == "beta") is >> p.beta;
    else if (name == "sigma2") is >> p.sigma2;
    else if (name == "mu") is >> p.mu;
    else if (name == "cell_area") is >> p.cell_area;
    else is >> data.seed;
    if (!is) throw Error(path.string() + ": bad value for '" + key + "'");
  }
  p.validate();
  data.counts.resize(p.dim());
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    if (!(is >> data.counts[i]) || data.counts[i] < 0) {
      throw Error(path.string() + ": bad or missing count at index " + std::to_string(i));
    }
  }
  return data;
}

void write_cholesky_cache(const std::filesystem::path& path, const CoxModelParams& params,
                          const Matrix& chol) {
  const Eigen::Index d = params.dim();
  if (chol.rows() != d || chol.cols() != d) throw DimensionMismatch("cholesky cache: wrong size");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os.write(kCholMagic.data(), kCholMagic.size());
  write_le<std::uint64_t>(os, std::uint64_t(d));
  write_le<std::uint64_t>(os, params.hash());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) write_le<double>(os, chol(i, j));
  }
  if (!os) throw Error("error writing " + path.string());
}

std::optional<Matrix> read_cholesky_cache(const std::filesystem::path& path,
                                          const CoxModelParams& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kCholMagic) return std::nullopt;
  const auto d = read_le<std::uint64_t>(is);
  const auto hash = read_le<std::uint64_t>(is);
  if (!is || d != std::uint64_t(params.dim()) || hash != params.hash()) return std::nullopt;
  Matrix chol = Matrix::Zero(Eigen::Index(d), Eigen::Index(d));
  for (Eigen::Index i = 0; i < Eigen::Index(d); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) chol(i, j) = read_le<double>(is);
  }
  if (!is) return std::nullopt;
  return chol;
}

CoxTarget load_or_create_cox_target(const std::filesystem::path& path,
                                    const CoxModelParams& params, std::uint64_t data_seed) {
  std::optional<Matrix> chol;
  CoxDataset data;
  const auto cache = std::filesystem::path(path.string() + ".chol");
  if (std::filesystem::exists(path)) {
    data = read_cox_dataset(path);
    chol = read_cholesky_cache(cache, data.params);
  } else {
    data.params = params;
    data.seed = data_seed;
    chol = cox_covariance_factor(params);
    data.counts = generate_cox_data(params, *chol, data_seed);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_cox_dataset(path, data);
    write_cholesky_cache(cache, params, *chol);
  }
  if (!chol) {
    chol = cox_covariance_factor(data.params);
    write_cholesky_cache(cache, data.params, *chol);
  }
  return CoxTarget(data.params, std::move(data.counts), std::move(*chol));
}

}  // namespace splithmc
