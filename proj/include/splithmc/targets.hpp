#ifndef SPLITHMC_TARGETS_HPP
#define SPLITHMC_TARGETS_HPP

#include "splithmc/core.hpp"
#include "splithmc/rng.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>

namespace splithmc {

/// Independent Gaussian components with standard deviations sigma_j:
/// log pi(theta) = -1/2 sum theta_j^2 / sigma_j^2.
class DiagonalGaussianTarget final : public TargetModel {
 public:
  explicit DiagonalGaussianTarget(Vector sigmas);

  /// sigma_j = 1/j, j = 1..d.
  static DiagonalGaussianTarget inverse_index(Eigen::Index d);
  /// One standard normal component.
  static DiagonalGaussianTarget unit();

  Eigen::Index dim() const override { return sigmas_.size(); }
  double log_density(const Vector& theta) const override;
  using TargetModel::grad_log_density;
  void grad_log_density(const Vector& theta, Vector& grad) const override;

  const Vector& sigmas() const noexcept { return sigmas_; }

 private:
  Vector sigmas_;
  Vector inv_var_;
};

/// Exact draw theta_j = sigma_j z_j.
Vector gaussian_exact_draw(const DiagonalGaussianTarget& target, RandomStream& rng);

/// Log-Gaussian Cox model on a grid_n x grid_n lattice of the unit square.
struct CoxModelParams {
  int grid_n = 64;
  double beta = 1.0 / 33.0;
  double sigma2 = 1.91;
  double mu = std::log(126.0) - 1.91 / 2.0;
  double cell_area = 1.0 / 4096.0;

  Eigen::Index dim() const noexcept { return Eigen::Index(grid_n) * grid_n; }
  /// Throws Error on non-positive sizes or scales.
  void validate() const;
  /// Stable hash over all fields, used to key the Cholesky cache.
  std::uint64_t hash() const noexcept;
  /// Grid of size n with the other parameters at their defaults and
  /// cell_area = 1/n^2.
  static CoxModelParams for_grid(int n);
};

struct CoxCovariance {
  Matrix sigma;
  Matrix chol;  ///< lower-triangular, sigma = chol * chol^T
};

/// Sigma_{(i,j),(i',j')} = sigma2 exp(-dist / (grid_n beta)), cells indexed
/// row-major (i * grid_n + j). Throws Error if the Cholesky factorisation
/// fails.
CoxCovariance build_cox_covariance(const CoxModelParams& params);

/// Lower Cholesky factor only; avoids keeping Sigma alive.
Matrix cox_covariance_factor(const CoxModelParams& params);

/// Posterior of the latent log-intensity field y given counts x:
/// log pi(y) = sum(x y - m exp(y)) - 1/2 (y - mu)^T Sigma^{-1} (y - mu).
class CoxTarget final : public TargetModel {
 public:
  CoxTarget(CoxModelParams params, Eigen::VectorXi counts);
  /// Uses a precomputed lower Cholesky factor of Sigma.
  CoxTarget(CoxModelParams params, Eigen::VectorXi counts, Matrix chol);

  Eigen::Index dim() const override { return params_.dim(); }
  double log_density(const Vector& y) const override;
  using TargetModel::grad_log_density;
  void grad_log_density(const Vector& y, Vector& grad) const override;

  /// Sigma^{-1} v through the stored precision matrix.
  Vector apply_precision(const Vector& v) const;
  /// Sigma^{-1} v through two triangular solves with the factor.
  Vector solve_covariance(const Vector& v) const;

  const CoxModelParams& params() const noexcept { return params_; }
  const Eigen::VectorXi& counts() const noexcept { return counts_; }
  const Matrix& chol() const noexcept { return chol_; }
  const Matrix& precision() const noexcept { return precision_; }

 private:
  CoxModelParams params_;
  Eigen::VectorXi counts_;
  Vector counts_d_;
  Matrix chol_;
  Matrix precision_;
};

/// y_true ~ N(mu 1, Sigma), then x_ij ~ Poisson(m exp(y_true_ij)).
Eigen::VectorXi generate_cox_data(const CoxModelParams& params, const Matrix& chol,
                                  std::uint64_t seed);
Eigen::VectorXi generate_cox_data(const CoxModelParams& params, std::uint64_t seed);

/// Diagonal term of the fixed-point map y <- mu 1 + L(y) Gamma, where L(y)
/// is the Cholesky factor of (Sigma^{-1} + diag(w(y)))^{-1}.
enum class CoxInitVariant {
  Curvature,  ///< w(y) = m exp(y), the Poisson information
  Literal,    ///< w(y) = y
};

struct CoxInitialState {
  Vector y;
  int iterations;
  double last_step;  ///< ||y^(n+1) - y^(n)|| at exit
};

/// Fixed-point iteration from y = mu 1, stopping once successive iterates
/// differ by less than `tol` in the Euclidean norm. Throws Error after
/// `max_iter` iterations without convergence.
CoxInitialState cox_initial_state(const CoxTarget& target, const Vector& gamma,
                                  CoxInitVariant variant = CoxInitVariant::Curvature,
                                  double tol = 1e-12, int max_iter = 200);
/// Draws Gamma ~ N(0, I) from `seed` and iterates as above.
CoxInitialState cox_initial_state(const CoxTarget& target, std::uint64_t seed,
                                  CoxInitVariant variant = CoxInitVariant::Curvature);

/// L(y) Gamma for the fixed-point map above (exposed for checking).
Vector cox_fixed_point_map(const CoxTarget& target, const Vector& y, const Vector& gamma,
                           CoxInitVariant variant);

// --- files -----------------------------------------------------------------

struct CoxDataset {
  CoxModelParams params;
  std::uint64_t seed = 0;
  Eigen::VectorXi counts;
};

/// Text file: "#"-prefixed magic line, "key value" header lines, then the
/// counts row-major, grid_n per line.
void write_cox_dataset(const std::filesystem::path& path, const CoxDataset& data);
CoxDataset read_cox_dataset(const std::filesystem::path& path);

/// Binary file: 8-byte magic, uint64 d, uint64 params hash, then the lower
/// triangle row by row as d(d+1)/2 little-endian doubles.
void write_cholesky_cache(const std::filesystem::path& path, const CoxModelParams& params,
                          const Matrix& chol);
/// nullopt if the file is missing or was written for different parameters.
std::optional<Matrix> read_cholesky_cache(const std::filesystem::path& path,
                                          const CoxModelParams& params);

/// Loads the dataset at `path`, generating it with `data_seed` first when it
/// does not exist, and the Cholesky factor from `path` + ".chol" (computed and
/// written when missing or stale).
CoxTarget load_or_create_cox_target(const std::filesystem::path& path,
                                    const CoxModelParams& params, std::uint64_t data_seed);

}  // namespace splithmc

#endif  // SPLITHMC_TARGETS_HPP
