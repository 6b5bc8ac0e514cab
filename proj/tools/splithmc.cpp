// splithmc: experiment runner, theory tables and the acceptance suite.

#include "splithmc/experiment.hpp"
#include "splithmc/theory.hpp"
#include "splithmc/validation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

namespace fs = std::filesystem;
using namespace splithmc;

namespace {

constexpr int kValidationFailure = 1;
constexpr int kSpecError = 2;
constexpr int kRuntimeError = 3;

std::ofstream open_csv(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error("cannot write " + (dir / name).string());
  std::cerr << "writing " << (dir / name).string() << '\n';
  return f;
}

std::vector<IntegratorScheme> family() {
  std::vector<IntegratorScheme> out;
  for (SchemeLabel label : IntegratorScheme::family_members()) out.push_back(IntegratorScheme::named(label));
  return out;
}

void theory_stability(const fs::path& out) {
  std::ofstream f = open_csv(out, "stability.csv");
  f << "scheme,b,c,eta\n";
  std::vector<IntegratorScheme> schemes = family();
  schemes.insert(schemes.begin(), IntegratorScheme::verlet());
  for (const auto& s : schemes) {
    const double eta = stability_interval_length(s);
    f << s.name() << ',' << format_double(s.b()) << ',' << format_double(s.c()) << ',' << format_double(eta) << '\n';
    std::cout << s.name() << "\teta = " << eta << '\n';
  }
}

void theory_rho(const fs::path& out) {
  std::ofstream f = open_csv(out, "rho.csv");
  const auto schemes = family();
  f << "zeta";
  for (const auto& s : schemes) f << ',' << s.name();
  f << '\n';
  for (int k = 1; k <= 300; ++k) {
    const double z = 0.01 * k;
    f << format_double(z);
    for (const auto& s : schemes) {
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = rho(s, z);
      } catch (const Error&) {
      }
      f << ',' << format_double(v);
    }
    f << '\n';
  }
  for (const auto& s : schemes) std::cout << s.name() << "\trho_inf = " << rho_inf(s) << '\n';
}

void theory_optimal_b(const fs::path& out) {
  const OptimalBResult r = optimal_b_search();
  std::ofstream f = open_csv(out, "optimal_b_trace.csv");
  f << "step,b,rho_inf\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    f << i << ',' << format_double(r.trace[i].first) << ',' << format_double(r.trace[i].second) << '\n';
  }
  std::cout.precision(15);
  std::cout << "b = " << r.b << "\nrho_inf = " << r.rho_inf << '\n';
}

void theory_curves(const fs::path& out) {
  std::vector<double> grid = {0.0};
  for (int k = 0; k <= 100; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.05 * k));
  const auto t1 = theorem1_curve(grid);
  const auto gu = gupta_curve(grid);
  std::ofstream f = open_csv(out, "acceptance_curves.csv");
  f << "mu,theorem1,gupta\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f << format_double(grid[i]) << ',' << format_double(t1[i].acceptance) << ',' << format_double(gu[i].acceptance)
      << '\n';
  }
  std::cout << "E(a) at mu=2: " << expected_acceptance_univariate(2.0)
            << ", at mu=100: " << expected_acceptance_univariate(100.0) << '\n';
}

int report(const std::vector<CriterionResult>& results, const fs::path& out, const std::string& name) {
  for (const auto& r : results) std::cout << format_criterion_line(r) << '\n';
  fs::create_directories(out);
  std::ofstream(out / name) << validation_report_json(results) << '\n';
  return all_passed(results) ? 0 : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split Hamiltonian Monte Carlo experiments"};
  app.require_subcommand(1);
  fs::path out = "results";
  int jobs = 1;
  app.add_option("--out", out, "Output directory");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run an experiment spec");
  fs::path spec_path;
  bool keep_legs = false;
  run->add_option("spec", spec_path, "Spec file")->required();
  run->add_flag("--keep-legs", keep_legs, "Write the per-leg log");

  auto* theory = app.add_subcommand("theory", "Closed-form tables");
  std::string table;
  theory->add_option("table", table, "stability | rho | optimal-b | curves | quadform")
      ->required()
      ->check(CLI::IsMember({"stability", "rho", "optimal-b", "curves", "quadform"}));

  auto* gen = app.add_subcommand("gen-cox-data", "Generate a synthetic Cox dataset");
  std::uint64_t data_seed = 1;
  int grid = 64;
  fs::path data_file;
  gen->add_option("--seed", data_seed, "Data seed")->required();
  gen->add_option("--grid", grid, "Lattice side")->check(CLI::Range(2, 256));
  gen->add_option("--file", data_file, "Dataset path (default <out>/cox_<n>x<n>.txt)");

  auto* validate = app.add_subcommand("validate", "Run the acceptance suite");
  bool skip_slow = false;
  std::vector<int> only;
  double blcasa_b = 0.0;
  fs::path work_dir = "data";
  validate->add_flag("--skip-slow", skip_slow, "Skip the Cox criterion");
  validate->add_option("--only", only, "Criterion ids")->delimiter(',');
  auto* tamper = validate->add_option("--blcasa-b", blcasa_b, "Override the BlCaSa coefficient");
  validate->add_option("--work-dir", work_dir, "Directory for the Cox dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSpecError;
  }

  try {
    if (*run) {
      const ExperimentSpec spec = load_experiment_spec(spec_path);
      RunOptions ro;
      ro.jobs = jobs;
      ro.keep_legs = keep_legs;
      ro.progress = [](std::size_t done, std::size_t total, const RunSummary& row) {
        std::cerr << '[' << done << '/' << total << "] " << row.scheme << " eps=" << row.epsilon
                  << " L=" << row.steps << " acceptance=" << row.summary.acceptance_rate << '\n';
      };
      const auto results = run_experiment(spec, ro);
      for (const auto& p : write_experiment_outputs(spec, results, out)) std::cout << p.string() << '\n';
      return 0;
    }
    if (*theory) {
      if (table == "stability") theory_stability(out);
      else if (table == "rho") theory_rho(out);
      else if (table == "optimal-b") theory_optimal_b(out);
      else if (table == "curves") theory_curves(out);
      else {
        ValidationOptions vo;
        return report(run_validation(vo, {4}), out, "quadform_report.json");
      }
      return 0;
    }
    if (*gen) {
      const CoxModelParams params = grid == 64 ? CoxModelParams{} : CoxModelParams::for_grid(grid);
      if (data_file.empty()) {
        data_file = out / ("cox_" + std::to_string(grid) + "x" + std::to_string(grid) + ".txt");
      }
      if (fs::exists(data_file)) throw Error(data_file.string() + " already exists");
      fs::create_directories(data_file.parent_path().empty() ? fs::path(".") : data_file.parent_path());
      const CoxTarget target = load_or_create_cox_target(data_file, params, data_seed);
      std::cout << data_file.string() << ": " << target.dim() << " cells, " << target.counts().sum()
                << " points\n";
      return 0;
    }
    if (*validate) {
      ValidationOptions vo;
      vo.jobs = jobs;
      vo.skip_slow = skip_slow;
      vo.work_dir = work_dir;
      if (*tamper) vo.blcasa_b = blcasa_b;
      vo.log = &std::cerr;
      fs::create_directories(work_dir);
      return report(run_validation(vo, std::set<int>(only.begin(), only.end())), out, "validation_report.json");
    }
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
