#ifndef SPLITHMC_CORE_HPP
#define SPLITHMC_CORE_HPP

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace splithmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A log-density, gradient or state component was NaN or infinite.
/// Carries the position at which it happened.
class NonFiniteValue : public Error {
 public:
  NonFiniteValue(const std::string& what, Vector theta)
      : Error(what), theta_(std::move(theta)) {}
  const Vector& theta() const noexcept { return theta_; }

 private:
  Vector theta_;
};

bool all_finite(const Vector& v) noexcept;

/// Position/momentum pair. Both halves have the same length d >= 1 and all
/// entries are finite.
class PhaseState {
 public:
  PhaseState(Vector theta, Vector p);

  const Vector& theta() const noexcept { return theta_; }
  const Vector& p() const noexcept { return p_; }
  Eigen::Index dim() const noexcept { return theta_.size(); }

  /// Momentum flip S(theta, p) = (theta, -p).
  PhaseState flipped() const { return PhaseState(theta_, -p_); }

 private:
  Vector theta_;
  Vector p_;
};

/// Identity or diagonal mass matrix.
class MassMatrix {
 public:
  static MassMatrix identity() { return MassMatrix(); }
  static MassMatrix diagonal(Vector diag);

  bool is_identity() const noexcept { return diag_.size() == 0; }
  /// Diagonal entries; empty for the identity.
  const Vector& diag() const noexcept { return diag_; }

  /// 1/2 p^T M^{-1} p
  double kinetic_energy(const Vector& p) const;
  /// theta += h M^{-1} p
  void drift(Vector& theta, const Vector& p, double h) const;
  /// Throws DimensionMismatch if a diagonal mass does not have length d.
  void check_dim(Eigen::Index d) const;

 private:
  MassMatrix() = default;
  Vector diag_;
  Vector inv_diag_;
};

/// Target distribution pi(theta), accessed through its log-density
/// L(theta) = log pi(theta) (up to a constant) and the gradient of L.
/// Implementations must be safe for concurrent const calls.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double log_density(const Vector& theta) const = 0;
  /// Writes grad L(theta) into `grad`, which is resized as needed.
  virtual void grad_log_density(const Vector& theta, Vector& grad) const = 0;

  Vector grad_log_density(const Vector& theta) const {
    Vector g;
    grad_log_density(theta, g);
    return g;
  }
};

/// H(theta, p) = -L(theta) + 1/2 p^T M^{-1} p, with the normalising constant
/// dropped.
double hamiltonian_energy(const PhaseState& state, const TargetModel& target,
                          const MassMatrix& mass);

/// H(final) - H(initial).
double energy_increment(const PhaseState& initial, const PhaseState& final_state,
                        const TargetModel& target, const MassMatrix& mass);

}  // namespace splithmc

#endif  // SPLITHMC_CORE_HPP
