#ifndef SPLITHMC_DIAGNOSTICS_HPP
#define SPLITHMC_DIAGNOSTICS_HPP

#include "splithmc/engine.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace splithmc {

/// Effective sample size of a single chain, Geyer initial positive sequence.
/// Throws Error for fewer than 10 values or a constant series.
double ess(std::span<const double> series);

/// Standard error of the mean by non-overlapping batch means. With
/// n_batches == 0 uses floor(sqrt(N)) batches.
double batch_means_se(std::span<const double> series, std::size_t n_batches = 0);

/// Components (1-based) whose ESS is reported, optionally with their squares.
struct WatchSpec {
  std::vector<Eigen::Index> components;
  bool squares = true;

  /// theta_1, theta_{d/2}, theta_d.
  static WatchSpec standard(Eigen::Index d);
};

struct ChainSummary {
  std::size_t n_legs = 0;
  double acceptance_rate = 0.0;
  double mean_delta_h = 0.0;  ///< over finite legs
  /// mean(dH + exp(-dH) - 1) over finite legs. Same expectation as dH at
  /// stationarity (E exp(-dH) = 1) with far smaller variance when dH is
  /// small. NaN if exp(-dH) overflows.
  double mean_delta_h_cv = 0.0;
  double neg_dh_fraction = 0.0;
  std::size_t blowups = 0;    ///< legs with delta_h = +inf
  /// Keys "theta<j>" and "theta<j>^2". Zero when the series is constant.
  std::map<std::string, double> ess;
  double ess_per_eps = 0.0;  ///< ESS of the first watched component times epsilon
  double avg_sq_jump = 0.0;
};

/// `epsilon` is the nominal step-length used for the efficiency figure.
ChainSummary summarize(const ChainOutput& output, double epsilon, const WatchSpec& watch);

/// One summary row of an experiment.
struct RunSummary {
  std::string target;
  std::string scheme;
  double b = 0.0;  ///< NaN for plain leapfrog
  double epsilon = 0.0;
  int steps = 0;
  double tau_end = 0.0;
  std::uint64_t seed = 0;
  std::vector<Eigen::Index> watch;  ///< components behind ess_theta1/mid/last
  ChainSummary summary;
};

std::string summary_csv_header();
std::string summary_csv_row(const RunSummary& row);

struct ScatterRow {
  std::string scheme;
  double epsilon;
  double mean_delta_h;
  double acceptance;
  double theorem1;  ///< 1 - (2/pi) arctan sqrt(mu/2) at mean_delta_h
  double gupta;     ///< 2 Phi(-sqrt(mu/2)) at mean_delta_h
};

/// Runs with a negative or non-finite mean energy error are skipped.
std::vector<ScatterRow> acceptance_vs_energy_scatter(std::span<const RunSummary> runs);

std::string scatter_csv_header();
std::string scatter_csv_row(const ScatterRow& row);

/// Anderson-Darling test of normality with mean and variance estimated.
struct NormalityTest {
  double a2;       ///< raw statistic
  double a2_star;  ///< small-sample corrected
  double p_value;
};

/// Throws Error for fewer than 8 values or zero variance.
NormalityTest anderson_darling_normal(std::span<const double> sample);

/// Shortest round-trip decimal form; "nan", "inf" for non-finite values.
std::string format_double(double v);

}  // namespace splithmc

#endif  // SPLITHMC_DIAGNOSTICS_HPP
