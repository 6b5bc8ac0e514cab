#pragma once

#include "splithmc/core.hpp"
#include "splithmc/rng.hpp"

#include <atomic>
#include <cmath>
#include <random>

namespace test {

using splithmc::Vector;

// Forwards to another target and counts gradient evaluations.
class CountingTarget final : public splithmc::TargetModel {
 public:
  explicit CountingTarget(const splithmc::TargetModel& inner) : inner_(inner) {}
  Eigen::Index dim() const override { return inner_.dim(); }
  double log_density(const Vector& t) const override { return inner_.log_density(t); }
  using TargetModel::grad_log_density;
  void grad_log_density(const Vector& t, Vector& g) const override {
    ++count_;
    inner_.grad_log_density(t, g);
  }
  std::size_t count() const { return count_; }
  void reset() { count_ = 0; }

 private:
  const splithmc::TargetModel& inner_;
  mutable std::atomic<std::size_t> count_{0};
};

// Non-Gaussian smooth target: -sum(theta^4/4 + theta^2/2) - 0.3 theta_0 theta_1.
class QuarticTarget final : public splithmc::TargetModel {
 public:
  explicit QuarticTarget(Eigen::Index d) : d_(d) {}
  Eigen::Index dim() const override { return d_; }
  double log_density(const Vector& t) const override {
    double s = 0.0;
    for (Eigen::Index j = 0; j < d_; ++j) s += 0.25 * std::pow(t[j], 4) + 0.5 * t[j] * t[j];
    if (d_ > 1) s += 0.3 * t[0] * t[1];
    return -s;
  }
  using TargetModel::grad_log_density;
  void grad_log_density(const Vector& t, Vector& g) const override {
    g = -(t.array().cube() + t.array()).matrix();
    if (d_ > 1) {
      g[0] -= 0.3 * t[1];
      g[1] -= 0.3 * t[0];
    }
  }

 private:
  Eigen::Index d_;
};

// Gradient is NaN once |theta_0| exceeds `limit`.
class CliffTarget final : public splithmc::TargetModel {
 public:
  explicit CliffTarget(double limit) : limit_(limit) {}
  Eigen::Index dim() const override { return 1; }
  double log_density(const Vector& t) const override {
    return std::abs(t[0]) > limit_ ? std::nan("") : -0.5 * t[0] * t[0];
  }
  using TargetModel::grad_log_density;
  void grad_log_density(const Vector& t, Vector& g) const override {
    g.resize(1);
    g[0] = std::abs(t[0]) > limit_ ? std::nan("") : -t[0];
  }

 private:
  double limit_;
};

inline Vector normal_vector(Eigen::Index d, splithmc::RandomStream& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = scale * n(rng);
  return v;
}

// Worst relative error of the analytic gradient against central differences.
inline double gradient_fd_error(const splithmc::TargetModel& target, const Vector& theta, double h = 1e-6) {
  const Vector g = target.grad_log_density(theta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    Vector up = theta, down = theta;
    up[j] += h;
    down[j] -= h;
    const double fd = (target.log_density(up) - target.log_density(down)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
  }
  return worst;
}

}  // namespace test
