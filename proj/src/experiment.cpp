#include "splithmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace splithmc {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw SpecError(key + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return v;
}

// Integer list; items may be ranges "first:last:stride".
std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value)) {
    if (item.find(':') == std::string::npos) {
      out.push_back(parse_number<int>(key, item));
      continue;
    }
    std::vector<int> parts;
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(parse_number<int>(key, trim(part)));
    if (parts.size() < 2 || parts.size() > 3) throw SpecError(key + ": bad range '" + item + "'");
    const int stride = parts.size() == 3 ? parts[2] : 1;
    if (stride <= 0 || parts[1] < parts[0]) throw SpecError(key + ": bad range '" + item + "'");
    for (int v = parts[0]; v <= parts[1]; v += stride) out.push_back(v);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_number<double>(key, item));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw SpecError(key + ": expected true or false, got '" + value + "'");
}

std::string target_id(TargetKind kind, int dim, int cox_grid) {
  switch (kind) {
    case TargetKind::DiagGaussian: return "diag_gaussian_d" + std::to_string(dim);
    case TargetKind::UnitGaussian1d: return "unit_gaussian_1d";
    case TargetKind::Cox: return "cox_" + std::to_string(cox_grid) + "x" + std::to_string(cox_grid);
  }
  return {};
}

std::vector<int> spec_dims(const ExperimentSpec& spec) {
  switch (spec.target) {
    case TargetKind::DiagGaussian: return spec.dims;
    case TargetKind::UnitGaussian1d: return {1};
    case TargetKind::Cox: return {spec.cox_grid * spec.cox_grid};
  }
  return {};
}

CoxModelParams cox_params(const ExperimentSpec& spec) {
  return spec.cox_grid == 64 ? CoxModelParams{} : CoxModelParams::for_grid(spec.cox_grid);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (experiment_id.empty()) throw SpecError("experiment_id: missing");
  for (char ch : experiment_id) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) {
      throw SpecError("experiment_id: only letters, digits, '_' and '-' are allowed");
    }
  }
  if (schemes.empty()) throw SpecError("schemes: at least one scheme is required");
  if (eps_list.empty() == L_list.empty()) {
    throw SpecError("eps_list/L_list: give exactly one of them");
  }
  if (!L_list.empty()) {
    if (!tau_end) throw SpecError("tau_end: required with L_list");
    if (steps) throw SpecError("steps: not allowed with L_list");
    if (eps_dim_exponent) throw SpecError("eps_dim_exponent: only allowed with eps_list");
    for (int l : L_list) {
      if (l < 1) throw SpecError("L_list: every L must be at least 1");
    }
  } else {
    if (tau_end.has_value() == steps.has_value()) {
      throw SpecError("tau_end/steps: eps_list needs exactly one of them");
    }
    if (steps && *steps < 1) throw SpecError("steps: must be at least 1");
    for (double e : eps_list) {
      if (!(e > 0.0) || !std::isfinite(e)) throw SpecError("eps_list: step-lengths must be positive");
    }
  }
  if (tau_end && !(*tau_end > 0.0)) throw SpecError("tau_end: must be positive");
  if (n_samples < 1) throw SpecError("n_samples: must be at least 1");
  if (replications < 1) throw SpecError("replications: must be at least 1");
  if (!(jitter_halfwidth >= 0.0 && jitter_halfwidth < 1.0)) {
    throw SpecError("jitter_halfwidth: must lie in [0, 1)");
  }
  if (target == TargetKind::DiagGaussian) {
    if (dims.empty()) throw SpecError("dim: required for diag_gaussian");
    for (int d : dims) {
      if (d < 1) throw SpecError("dim: must be positive");
    }
  } else if (!dims.empty()) {
    throw SpecError("dim: only meaningful for diag_gaussian");
  }
  if (target == TargetKind::Cox) {
    if (cox_dataset.empty()) throw SpecError("cox_dataset: required for the cox target");
    if (cox_grid < 2) throw SpecError("cox_grid: must be at least 2");
  }
  for (int d : spec_dims(*this)) {
    for (Eigen::Index j : watch_components) {
      if (j < 1 || j > d) {
        throw SpecError("watch_components: component " + std::to_string(j) + " outside 1.." +
                        std::to_string(d));
      }
    }
  }
}

ExperimentSpec parse_experiment_spec(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) throw SpecError(key + ": given twice");

    if (key == "experiment_id") {
      spec.experiment_id = value;
    } else if (key == "target") {
      if (value == "diag_gaussian") spec.target = TargetKind::DiagGaussian;
      else if (value == "unit_gaussian_1d") spec.target = TargetKind::UnitGaussian1d;
      else if (value == "cox") spec.target = TargetKind::Cox;
      else throw SpecError("target: unknown target '" + value + "'");
    } else if (key == "dim") {
      spec.dims = parse_int_list(key, value);
    } else if (key == "schemes") {
      for (const std::string& s : split_list(value)) {
        try {
          spec.schemes.push_back(IntegratorScheme::parse(s));
        } catch (const Error& e) {
          throw SpecError(std::string("schemes: ") + e.what());
        }
      }
    } else if (key == "eps_list") {
      spec.eps_list = parse_real_list(key, value);
    } else if (key == "L_list") {
      spec.L_list = parse_int_list(key, value);
    } else if (key == "tau_end") {
      spec.tau_end = parse_number<double>(key, value);
    } else if (key == "steps") {
      spec.steps = parse_number<int>(key, value);
    } else if (key == "eps_dim_exponent") {
      spec.eps_dim_exponent = parse_number<double>(key, value);
    } else if (key == "n_samples") {
      spec.n_samples = parse_number<std::size_t>(key, value);
    } else if (key == "n_burnin") {
      spec.n_burnin = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "replications") {
      spec.replications = parse_number<int>(key, value);
    } else if (key == "watch_components") {
      for (int j : parse_int_list(key, value)) spec.watch_components.push_back(j);
    } else if (key == "randomize_eps") {
      spec.randomize_eps = parse_bool(key, value);
    } else if (key == "jitter_halfwidth") {
      spec.jitter_halfwidth = parse_number<double>(key, value);
    } else if (key == "cox_dataset") {
      const std::filesystem::path p(value);
      spec.cox_dataset = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    } else if (key == "cox_data_seed") {
      spec.cox_data_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "cox_grid") {
      spec.cox_grid = parse_number<int>(key, value);
    } else if (key == "cox_init") {
      if (value == "curvature") spec.cox_init = CoxInitVariant::Curvature;
      else if (value == "literal") spec.cox_init = CoxInitVariant::Literal;
      else throw SpecError("cox_init: expected curvature or literal");
    } else {
      throw SpecError(key + ": unknown key");
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str(), path.parent_path());
}

std::vector<SweepCell> expand_cells(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SweepCell> cells;
  for (int d : spec_dims(spec)) {
    for (const IntegratorScheme& scheme : spec.schemes) {
      auto add = [&](double eps, int l) {
        for (int r = 0; r < spec.replications; ++r) {
          cells.push_back({d, scheme, eps, l, r, spec.seed + std::uint64_t(r)});
        }
      };
      if (!spec.L_list.empty()) {
        for (int l : spec.L_list) add(*spec.tau_end / l, l);
      } else {
        for (double e : spec.eps_list) {
          const double eps = spec.eps_dim_exponent ? e * std::pow(double(d), *spec.eps_dim_exponent) : e;
          const int l = spec.steps ? *spec.steps : std::max(1, int(std::lround(*spec.tau_end / eps)));
          add(eps, l);
        }
      }
    }
  }
  return cells;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, std::size_t(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<CellResult> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const std::vector<SweepCell> cells = expand_cells(spec);

  std::map<int, std::unique_ptr<TargetModel>> targets;
  std::map<std::uint64_t, Vector> cox_starts;
  if (spec.target == TargetKind::Cox) {
    auto cox = std::make_unique<CoxTarget>(
        load_or_create_cox_target(spec.cox_dataset, cox_params(spec), spec.cox_data_seed));
    for (const SweepCell& c : cells) cox_starts.emplace(c.seed, Vector());
    std::vector<std::uint64_t> seeds;
    for (const auto& [s, _] : cox_starts) seeds.push_back(s);
    parallel_for(seeds.size(), options.jobs, [&](std::size_t i) {
      cox_starts.at(seeds[i]) = cox_initial_state(*cox, seeds[i], spec.cox_init).y;
    });
    targets.emplace(int(cox->dim()), std::move(cox));
  } else {
    for (int d : spec_dims(spec)) {
      targets.emplace(d, std::make_unique<DiagonalGaussianTarget>(
                             spec.target == TargetKind::UnitGaussian1d
                                 ? DiagonalGaussianTarget::unit()
                                 : DiagonalGaussianTarget::inverse_index(d)));
    }
  }

  std::vector<CellResult> results(cells.size());
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
    const SweepCell& cell = cells[i];
    const TargetModel& target = *targets.at(cell.dim);

    Vector start;
    if (spec.target == TargetKind::Cox) {
      start = cox_starts.at(cell.seed);
    } else {
      RandomStream init = RandomStream(cell.seed).substream("init");
      start = gaussian_exact_draw(static_cast<const DiagonalGaussianTarget&>(target), init);
    }

    ChainConfig config;
    config.target_id = target_id(spec.target, cell.dim, spec.cox_grid);
    config.scheme = cell.scheme;
    config.epsilon = cell.epsilon;
    config.steps = cell.steps;
    config.n_samples = spec.n_samples;
    config.n_burnin = spec.n_burnin;
    config.seed = cell.seed;
    config.randomize_eps = spec.randomize_eps;
    config.jitter_halfwidth = spec.jitter_halfwidth;
    ChainOutput out = run_chain(target, config, start);

    WatchSpec watch = WatchSpec::standard(cell.dim);
    if (!spec.watch_components.empty()) watch.components = spec.watch_components;

    CellResult& res = results[i];
    res.row.target = config.target_id;
    res.row.scheme = cell.scheme.name();
    res.row.b = cell.scheme.b();
    res.row.epsilon = cell.epsilon;
    res.row.steps = cell.steps;
    res.row.tau_end = cell.epsilon * cell.steps;
    res.row.seed = cell.seed;
    res.row.watch = watch.components;
    res.row.summary = summarize(out, cell.epsilon, watch);
    if (options.keep_legs) res.legs = std::move(out.legs);

    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(++done, cells.size(), res.row);
    }
  });
  return results;
}

std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentSpec& spec,
                                                            const std::vector<CellResult>& results,
                                                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& suffix) {
    const auto path = out_dir / (spec.experiment_id + suffix);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    written.push_back(path);
    return f;
  };

  std::vector<RunSummary> rows;
  for (const CellResult& r : results) rows.push_back(r.row);
  {
    std::ofstream f = open("_summary.csv");
    f << summary_csv_header() << '\n';
    for (const RunSummary& r : rows) f << summary_csv_row(r) << '\n';
  }
  {
    std::ofstream f = open("_scatter.csv");
    f << scatter_csv_header() << '\n';
    for (const ScatterRow& r : acceptance_vs_energy_scatter(rows)) f << scatter_csv_row(r) << '\n';
  }
  const bool any_legs = std::any_of(results.begin(), results.end(),
                                    [](const CellResult& r) { return !r.legs.empty(); });
  if (any_legs) {
    std::ofstream f = open("_legs.csv");
    f << "target,scheme,eps,L,seed,leg,delta_h,accepted,sq_jump,eps_used\n";
    for (const CellResult& r : results) {
      const std::string prefix = r.row.target + ',' + r.row.scheme + ',' + format_double(r.row.epsilon) +
                                 ',' + std::to_string(r.row.steps) + ',' + std::to_string(r.row.seed) + ',';
      for (std::size_t n = 0; n < r.legs.size(); ++n) {
        const LegRecord& leg = r.legs[n];
        f << prefix << n << ',' << format_double(leg.delta_h) << ',' << (leg.accepted ? 1 : 0) << ','
          << format_double(leg.sq_jump) << ',' << format_double(leg.eps_used) << '\n';
      }
    }
  }
  return written;
}

}  // namespace splithmc
