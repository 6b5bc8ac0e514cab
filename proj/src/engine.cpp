#include "splithmc/engine.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace splithmc {

void ChainConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error("chain config: epsilon must be positive");
  if (steps < 1) throw Error("chain config: L must be at least 1");
  if (!(jitter_halfwidth >= 0.0 && jitter_halfwidth < 1.0)) {
    throw Error("chain config: jitter_halfwidth must lie in [0, 1)");
  }
}

ChainStreams ChainStreams::from_seed(std::uint64_t seed) {
  const RandomStream root(seed);
  return ChainStreams{root.substream("momentum"), root.substream("jitter"),
                      root.substream("accept")};
}

LegPropagator default_propagator(const TargetModel& target, const ChainConfig& config) {
  return [&target, &config](const PhaseState& state, double eps) {
    return integrate_leg(state, target, config.mass, LegSpec(eps, config.steps), config.scheme);
  };
}

StepResult hmc_step(const TargetModel& target, const Vector& theta, const ChainConfig& config,
                    ChainStreams& streams, const LegPropagator* propagator) {
  const double log_pi = target.log_density(theta);
  if (!std::isfinite(log_pi)) throw NonFiniteValue("hmc step: non-finite log-density at start", theta);
  return hmc_step(target, theta, log_pi, config, streams, propagator);
}

StepResult hmc_step(const TargetModel& target, const Vector& theta, double log_density,
                    const ChainConfig& config, ChainStreams& streams,
                    const LegPropagator* propagator) {
  const Eigen::Index d = theta.size();
  std::normal_distribution<double> normal;
  Vector p(d);
  if (config.mass.is_identity()) {
    for (Eigen::Index j = 0; j < d; ++j) p[j] = normal(streams.momentum);
  } else {
    for (Eigen::Index j = 0; j < d; ++j) p[j] = std::sqrt(config.mass.diag()[j]) * normal(streams.momentum);
  }

  double eps = config.epsilon;
  if (config.randomize_eps && config.jitter_halfwidth > 0.0) {
    std::uniform_real_distribution<double> jitter(-config.jitter_halfwidth, config.jitter_halfwidth);
    eps *= 1.0 + jitter(streams.jitter);
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(streams.accept);

  const PhaseState start(theta, std::move(p));
  const double h0 = -log_density + config.mass.kinetic_energy(start.p());
  const std::size_t nominal_evals =
      config.scheme.is_family() ? 3 * std::size_t(config.steps) + 1 : std::size_t(config.steps) + 1;

  double delta_h = std::numeric_limits<double>::infinity();
  std::size_t evals = nominal_evals;
  Vector proposal;
  double proposal_log_pi = 0.0;
  try {
    LegOutcome out = propagator ? (*propagator)(start, eps)
                                : integrate_leg(start, target, config.mass,
                                                LegSpec(eps, config.steps), config.scheme);
    evals = out.grad_evals;
    proposal_log_pi = target.log_density(out.state.theta());
    const double h1 = -proposal_log_pi + config.mass.kinetic_energy(out.state.p());
    if (std::isfinite(h1)) delta_h = h1 - h0;
    proposal = out.state.theta();
  } catch (const NonFiniteValue&) {
    delta_h = std::numeric_limits<double>::infinity();
  }

  StepResult result;
  result.record = LegRecord{delta_h, false, 0.0, eps, evals};
  if (u < std::exp(-delta_h)) {
    result.record.accepted = true;
    result.record.sq_jump = (proposal - theta).squaredNorm();
    result.theta = std::move(proposal);
    result.log_density = proposal_log_pi;
  } else {
    result.theta = theta;
    result.log_density = log_density;
  }
  return result;
}

ChainOutput run_chain(const TargetModel& target, const ChainConfig& config,
                      const Vector& initial_theta, const LegPropagator* propagator) {
  config.validate();
  if (initial_theta.size() != target.dim()) {
    throw DimensionMismatch("run_chain: initial state has dimension " +
                            std::to_string(initial_theta.size()) + ", target has " +
                            std::to_string(target.dim()));
  }
  config.mass.check_dim(target.dim());
  double log_pi = target.log_density(initial_theta);
  if (!std::isfinite(log_pi)) {
    throw NonFiniteValue("run_chain: initial state outside the target's support", initial_theta);
  }

  ChainStreams streams = ChainStreams::from_seed(config.seed);
  ChainOutput out;
  out.samples.resize(Eigen::Index(config.n_samples), target.dim());
  out.legs.reserve(config.n_samples);
  Vector theta = initial_theta;
  const std::size_t total = config.n_burnin + config.n_samples;
  for (std::size_t n = 0; n < total; ++n) {
    StepResult step = hmc_step(target, theta, log_pi, config, streams, propagator);
    theta = std::move(step.theta);
    log_pi = step.log_density;
    if (n >= config.n_burnin) {
      out.samples.row(Eigen::Index(n - config.n_burnin)) = theta.transpose();
      out.legs.push_back(step.record);
    }
  }
  return out;
}

}  // namespace splithmc
