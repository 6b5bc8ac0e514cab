#ifndef SPLITHMC_ENGINE_HPP
#define SPLITHMC_ENGINE_HPP

#include "splithmc/integrators.hpp"
#include "splithmc/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace splithmc {

struct ChainConfig {
  std::string target_id;
  IntegratorScheme scheme = IntegratorScheme::named(SchemeLabel::LF);
  double epsilon = 0.1;  ///< basic step-length
  int steps = 1;         ///< L
  std::size_t n_samples = 0;
  std::size_t n_burnin = 0;
  std::uint64_t seed = 0;
  /// Leg n uses (1 + u_n) epsilon with u_n ~ U(-jitter_halfwidth, jitter_halfwidth).
  bool randomize_eps = true;
  double jitter_halfwidth = 0.05;
  MassMatrix mass = MassMatrix::identity();

  /// Throws Error naming the offending field.
  void validate() const;
};

struct LegRecord {
  double delta_h;  ///< +inf when the leg blew up
  bool accepted;
  double sq_jump;  ///< ||theta_new - theta_old||^2, zero on rejection
  double eps_used;
  std::size_t grad_evals;
};

struct ChainOutput {
  Matrix samples;  ///< N x d, row n is the position after leg n
  std::vector<LegRecord> legs;
};

/// Named substreams of one chain's seed.
struct ChainStreams {
  RandomStream momentum;
  RandomStream jitter;
  RandomStream accept;

  static ChainStreams from_seed(std::uint64_t seed);
};

/// Maps the leg's initial state and step-length to the proposal.
using LegPropagator = std::function<LegOutcome(const PhaseState&, double epsilon)>;

/// integrate_leg with the config's scheme, L and mass.
LegPropagator default_propagator(const TargetModel& target, const ChainConfig& config);

struct StepResult {
  Vector theta;
  LegRecord record;
  double log_density;  ///< log pi at the returned theta
};

/// One HMC transition from theta: fresh momentum, optional step-length
/// jitter, one leg, Metropolis test. Non-finite legs are rejected with
/// delta_h = +inf. `propagator` overrides the integrator when given.
StepResult hmc_step(const TargetModel& target, const Vector& theta, const ChainConfig& config,
                    ChainStreams& streams, const LegPropagator* propagator = nullptr);

/// Same, with log pi(theta) already known.
StepResult hmc_step(const TargetModel& target, const Vector& theta, double log_density,
                    const ChainConfig& config, ChainStreams& streams,
                    const LegPropagator* propagator = nullptr);

/// n_burnin discarded transitions followed by n_samples recorded ones.
/// Deterministic given config.seed.
ChainOutput run_chain(const TargetModel& target, const ChainConfig& config,
                      const Vector& initial_theta, const LegPropagator* propagator = nullptr);

}  // namespace splithmc

#endif  // SPLITHMC_ENGINE_HPP
