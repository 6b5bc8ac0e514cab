#ifndef SPLITHMC_EXPERIMENT_HPP
#define SPLITHMC_EXPERIMENT_HPP

#include "splithmc/diagnostics.hpp"
#include "splithmc/targets.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace splithmc {

/// Invalid experiment description; the message names the field.
class SpecError : public Error {
 public:
  using Error::Error;
};

enum class TargetKind { DiagGaussian, UnitGaussian1d, Cox };

struct ExperimentSpec {
  std::string experiment_id;
  TargetKind target = TargetKind::DiagGaussian;
  std::vector<int> dims;  ///< diag_gaussian only
  std::vector<IntegratorScheme> schemes;

  // Exactly one of eps_list / L_list. With eps_list, L = round(tau_end / eps)
  // unless `steps` fixes it.
  std::vector<double> eps_list;
  std::vector<int> L_list;
  std::optional<double> tau_end;
  std::optional<int> steps;
  /// eps_list entries are multiplied by d^eps_dim_exponent.
  std::optional<double> eps_dim_exponent;

  std::size_t n_samples = 1000;
  std::size_t n_burnin = 0;
  std::uint64_t seed = 1;
  int replications = 1;
  std::vector<Eigen::Index> watch_components;  ///< empty: theta_1, theta_{d/2}, theta_d
  bool randomize_eps = true;
  double jitter_halfwidth = 0.05;

  std::filesystem::path cox_dataset;  ///< resolved relative to the spec file
  std::uint64_t cox_data_seed = 1;
  int cox_grid = 64;
  CoxInitVariant cox_init = CoxInitVariant::Curvature;

  /// Throws SpecError.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment, lists are comma
/// separated. Throws SpecError.
ExperimentSpec parse_experiment_spec(const std::string& text,
                                     const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// One (dimension, scheme, step-length, replicate) combination.
struct SweepCell {
  int dim;
  IntegratorScheme scheme;
  double epsilon;
  int steps;
  int replicate;
  std::uint64_t seed;
};

std::vector<SweepCell> expand_cells(const ExperimentSpec& spec);

struct CellResult {
  RunSummary row;
  std::vector<LegRecord> legs;  ///< empty unless kept
};

struct RunOptions {
  int jobs = 1;
  bool keep_legs = false;
  /// Called after each finished cell (from worker threads, serialised).
  std::function<void(std::size_t done, std::size_t total, const RunSummary&)> progress;
};

/// Runs every cell; results are in expand_cells order regardless of jobs.
std::vector<CellResult> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Writes <id>_summary.csv, <id>_scatter.csv and, when legs were kept,
/// <id>_legs.csv. Returns the written paths.
std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentSpec& spec,
                                                            const std::vector<CellResult>& results,
                                                            const std::filesystem::path& out_dir);

/// Runs f(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

}  // namespace splithmc

#endif  // SPLITHMC_EXPERIMENT_HPP
