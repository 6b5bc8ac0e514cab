#ifndef SPLITHMC_VALIDATION_HPP
#define SPLITHMC_VALIDATION_HPP

// The acceptance suite: each criterion computes its measured values and
// compares them with fixed reference values at fixed tolerances.

#include "splithmc/experiment.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace splithmc {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  bool informational = false;  ///< reported, never fails the suite
  bool skipped = false;
  std::string measured;        ///< one-line human summary
  std::vector<std::pair<std::string, double>> values;  ///< machine-readable measurements
  double seconds = 0.0;
};

struct ValidationOptions {
  int jobs = 1;
  bool skip_slow = false;  ///< skips the Cox criterion
  /// Replaces the BlCaSa coefficient everywhere in the suite (sensitivity probe).
  std::optional<double> blcasa_b;
  /// Holds the Cox dataset and its Cholesky cache.
  std::filesystem::path work_dir = ".";
  std::ostream* log = nullptr;
};

/// The six family members in their usual order, with BlCaSa overridden
/// when requested.
std::vector<IntegratorScheme> validation_schemes(const ValidationOptions& options);

/// Runs the selected criteria (all when `only` is empty) in increasing id.
std::vector<CriterionResult> run_validation(const ValidationOptions& options,
                                            const std::set<int>& only = {});

/// "[PASS] 1 title: measured (1.23 s)".
std::string format_criterion_line(const CriterionResult& r);

/// JSON report with one object per criterion.
std::string validation_report_json(const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace splithmc

#endif  // SPLITHMC_VALIDATION_HPP
