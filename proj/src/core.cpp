#include "splithmc/core.hpp"

#include <cmath>

namespace splithmc {

bool all_finite(const Vector& v) noexcept {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

PhaseState::PhaseState(Vector theta, Vector p)
    : theta_(std::move(theta)), p_(std::move(p)) {
  if (theta_.size() < 1) throw DimensionMismatch("phase state: dimension must be at least 1");
  if (theta_.size() != p_.size()) {
    throw DimensionMismatch("phase state: theta has length " + std::to_string(theta_.size()) +
                            " but p has length " + std::to_string(p_.size()));
  }
  if (!all_finite(theta_) || !all_finite(p_)) {
    throw NonFiniteValue("phase state: non-finite entry", theta_);
  }
}

MassMatrix MassMatrix::diagonal(Vector diag) {
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
      throw Error("mass matrix: diagonal entries must be positive and finite");
    }
  }
  if (diag.size() == 0) throw Error("mass matrix: empty diagonal");
  MassMatrix m;
  m.inv_diag_ = diag.cwiseInverse();
  m.diag_ = std::move(diag);
  return m;
}

double MassMatrix::kinetic_energy(const Vector& p) const {
  if (is_identity()) return 0.5 * p.squaredNorm();
  return 0.5 * p.cwiseAbs2().dot(inv_diag_);
}

void MassMatrix::drift(Vector& theta, const Vector& p, double h) const {
  if (is_identity()) {
    theta.noalias() += h * p;
  } else {
    theta.array() += h * p.array() * inv_diag_.array();
  }
}

void MassMatrix::check_dim(Eigen::Index d) const {
  if (!is_identity() && diag_.size() != d) {
    throw DimensionMismatch("mass matrix has dimension " + std::to_string(diag_.size()) +
                            ", expected " + std::to_string(d));
  }
}

double hamiltonian_energy(const PhaseState& state, const TargetModel& target,
                          const MassMatrix& mass) {
  if (state.dim() != target.dim()) {
    throw DimensionMismatch("state dimension " + std::to_string(state.dim()) +
                            " does not match target dimension " + std::to_string(target.dim()));
  }
  mass.check_dim(state.dim());
  const double log_pi = target.log_density(state.theta());
  if (!std::isfinite(log_pi)) {
    throw NonFiniteValue("non-finite log-density", state.theta());
  }
  return -log_pi + mass.kinetic_energy(state.p());
}

double energy_increment(const PhaseState& initial, const PhaseState& final_state,
                        const TargetModel& target, const MassMatrix& mass) {
  return hamiltonian_energy(final_state, target, mass) - hamiltonian_energy(initial, target, mass);
}

}  // namespace splithmc
