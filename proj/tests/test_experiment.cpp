#include "splithmc/experiment.hpp"
#include "splithmc/validation.hpp"

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>

using namespace splithmc;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small sweep
experiment_id = small
target = diag_gaussian
dim = 4, 8
schemes = LF, BlCaSa
eps_list = 0.2, 0.3
tau_end = 1.2
n_samples = 300
seed = 5
replications = 2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_experiment_spec(text);
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("spec parsing") {
  const ExperimentSpec s = parse_experiment_spec(kSmall);
  CHECK(s.experiment_id == "small");
  CHECK(s.dims == std::vector<int>{4, 8});
  REQUIRE(s.schemes.size() == 2);
  CHECK(s.schemes[1].label() == SchemeLabel::BlCaSa);
  CHECK(s.tau_end == 1.2);
  CHECK(s.replications == 2);

  const ExperimentSpec r = parse_experiment_spec(
      "experiment_id = r\ntarget = unit_gaussian_1d\nschemes = PrEtAl\nL_list = 200:960:40, 7\ntau_end = 5\n");
  CHECK(r.L_list.size() == 21);
  CHECK(r.L_list.front() == 200);
  CHECK(r.L_list[19] == 960);
  CHECK(r.L_list.back() == 7);
}

TEST_CASE("spec errors name the field") {
  const std::string base = "experiment_id = e\ntarget = unit_gaussian_1d\nschemes = LF\neps_list = 0.1\ntau_end = 1\n";
  CHECK(error_of(base).empty());
  CHECK(error_of(base + "bogus = 1\n").find("bogus") == 0);
  CHECK(error_of(base + "seed = 1\nseed = 2\n").find("seed") == 0);
  CHECK(error_of(base + "n_samples = many\n").find("n_samples") == 0);
  CHECK(error_of(base + "L_list = 10\n").find("eps_list/L_list") == 0);
  CHECK(error_of(base + "dim = 3\n").find("dim") == 0);
  CHECK(error_of(base + "watch_components = 2\n").find("watch_components") == 0);
  CHECK(error_of(base + "steps = 4\n").find("tau_end/steps") == 0);
  CHECK(error_of("experiment_id = e\ntarget = unit_gaussian_1d\nschemes =\neps_list = 0.1\ntau_end = 1\n")
            .find("schemes") == 0);
  CHECK(error_of("experiment_id = e\ntarget = unit_gaussian_1d\nschemes = LF\nL_list = 9:3\ntau_end = 1\n")
            .find("L_list") == 0);
  CHECK(error_of("experiment_id = e\ntarget = cox\nschemes = LF\neps_list = 0.1\ntau_end = 1\n").find("cox_dataset") == 0);
  CHECK(error_of("no equals sign\n").find("line 1") == 0);
  CHECK_THROWS_AS(load_experiment_spec("/nonexistent/spec.cfg"), SpecError);
}

TEST_CASE("cell expansion") {
  const auto cells = expand_cells(parse_experiment_spec(kSmall));
  CHECK(cells.size() == 2 * 2 * 2 * 2);
  for (const auto& c : cells) {
    CHECK(c.seed == 5 + std::uint64_t(c.replicate));
    CHECK(c.steps == (c.epsilon == 0.2 ? 6 : 4));
  }
  ExperimentSpec scaled = parse_experiment_spec(kSmall);
  scaled.eps_dim_exponent = -0.25;
  scaled.replications = 1;
  const auto sc = expand_cells(scaled);
  bool found = false;
  for (const auto& c : sc) {
    if (c.dim == 8 && c.steps == int(std::lround(1.2 / (0.2 * std::pow(8.0, -0.25))))) found = true;
  }
  CHECK(found);
}

TEST_CASE("outputs do not depend on the thread count") {
  const ExperimentSpec spec = parse_experiment_spec(kSmall);
  const fs::path root = fs::temp_directory_path() / "splithmc_test_jobs";
  fs::remove_all(root);
  std::vector<std::string> files[2];
  int k = 0;
  for (int jobs : {1, 3}) {
    RunOptions o;
    o.jobs = jobs;
    o.keep_legs = true;
    std::atomic<int> calls{0};
    o.progress = [&](std::size_t, std::size_t, const RunSummary&) { ++calls; };
    const auto results = run_experiment(spec, o);
    CHECK(calls == 16);
    for (const auto& p : write_experiment_outputs(spec, results, root / std::to_string(jobs))) {
      files[k].push_back(slurp(p));
    }
    ++k;
  }
  REQUIRE(files[0].size() == 3);
  CHECK(files[0] == files[1]);
  std::istringstream summary(files[0][0]);
  std::string header;
  std::getline(summary, header);
  CHECK(header == summary_csv_header());
  fs::remove_all(root);
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 100);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw Error("boom");
                  }),
                  Error);
}

}  // TEST_SUITE

TEST_SUITE("validation") {

TEST_CASE("a tampered coefficient is caught") {
  ValidationOptions honest;
  ValidationOptions tampered;
  tampered.blcasa_b = 0.38;
  const auto a = run_validation(honest, {1, 3});
  const auto b = run_validation(tampered, {1, 3});
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  CHECK(a[1].passed);
  // The BlCaSa entry is third in the table; its eta moves well outside tolerance.
  CHECK(std::abs(a[0].values[2].second - 4.662) < 5e-4);
  CHECK(std::abs(b[0].values[2].second - 4.662) > 5e-4);
  CHECK_FALSE(b[0].passed);
  CHECK(format_criterion_line(b[0]).rfind("[FAIL] criterion 1", 0) == 0);
  CHECK(validation_report_json(a).find("\"criterion\"") != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("experiment") {

TEST_CASE("bundled configs parse") {
  int n = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(SPLITHMC_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const ExperimentSpec spec = load_experiment_spec(entry.path());
    CHECK(spec.experiment_id == entry.path().stem().string());
    CHECK_FALSE(expand_cells(spec).empty());
    ++n;
  }
  CHECK(n >= 4);
  const ExperimentSpec g = load_experiment_spec(fs::path(SPLITHMC_SOURCE_DIR) / "configs/gauss256.cfg");
  CHECK(g.L_list.size() == 20);
  CHECK(expand_cells(g).size() == 120);
}

}  // TEST_SUITE
