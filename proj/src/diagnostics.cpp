#include "splithmc/diagnostics.hpp"

#include "splithmc/theory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace splithmc {

double ess(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 10) throw Error("ess: series needs at least 10 values");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  std::vector<double> c(n);
  for (std::size_t t = 0; t < n; ++t) c[t] = x[t] - mean;

  auto autocov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += c[t] * c[t + k];
    return s / double(n);
  };
  const double gamma0 = autocov(0);
  const double scale = std::max(std::abs(mean), std::sqrt(gamma0));
  if (!(gamma0 > 0.0) || std::sqrt(gamma0) <= 1e-14 * scale) {
    throw Error("ess: series has zero variance");
  }

  // Pair sums Gamma_m = gamma_{2m} + gamma_{2m+1}, summed while positive.
  double sum = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (m == 0 ? gamma0 : autocov(2 * m)) + autocov(2 * m + 1);
    if (!(pair > 0.0)) break;
    sum += pair;
  }
  double tau = (2.0 * sum - gamma0) / gamma0;
  // Strongly anticorrelated series can drive tau to zero or below.
  tau = std::max(tau, 1.0 / std::log10(double(n)));
  return double(n) / tau;
}

double batch_means_se(std::span<const double> x, std::size_t n_batches) {
  const std::size_t n = x.size();
  if (n_batches == 0) n_batches = std::size_t(std::sqrt(double(n)));
  if (n_batches < 2 || n < n_batches) throw Error("batch means: too few values");
  const std::size_t size = n / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const auto first = x.begin() + std::ptrdiff_t(b * size);
    means[b] = std::accumulate(first, first + std::ptrdiff_t(size), 0.0) / double(size);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / double(n_batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / double(n_batches - 1) / double(n_batches));
}

WatchSpec WatchSpec::standard(Eigen::Index d) {
  WatchSpec w;
  w.components = {1, std::max<Eigen::Index>(1, d / 2), d};
  return w;
}

ChainSummary summarize(const ChainOutput& out, double epsilon, const WatchSpec& watch) {
  ChainSummary s;
  s.n_legs = out.legs.size();
  if (s.n_legs == 0) return s;
  std::size_t accepted = 0, negative = 0, finite = 0;
  double dh_sum = 0.0, cv_sum = 0.0, jump_sum = 0.0;
  for (const LegRecord& leg : out.legs) {
    if (leg.accepted) ++accepted;
    if (leg.delta_h < 0.0) ++negative;
    if (std::isfinite(leg.delta_h)) {
      dh_sum += leg.delta_h;
      cv_sum += leg.delta_h + std::expm1(-leg.delta_h);
      ++finite;
    } else {
      ++s.blowups;
    }
    jump_sum += leg.sq_jump;
  }
  const double n = double(s.n_legs);
  s.acceptance_rate = double(accepted) / n;
  s.neg_dh_fraction = double(negative) / n;
  s.mean_delta_h = finite > 0 ? dh_sum / double(finite) : std::numeric_limits<double>::quiet_NaN();
  s.mean_delta_h_cv = finite > 0 && std::isfinite(cv_sum) ? cv_sum / double(finite)
                                                          : std::numeric_limits<double>::quiet_NaN();
  s.avg_sq_jump = jump_sum / n;

  auto safe_ess = [](const std::vector<double>& v) {
    try {
      return ess(v);
    } catch (const Error&) {
      return 0.0;
    }
  };
  const Eigen::Index d = out.samples.cols();
  std::vector<double> col(s.n_legs), sq(s.n_legs);
  bool first = true;
  for (Eigen::Index j : watch.components) {
    if (j < 1 || j > d) throw DimensionMismatch("watch component " + std::to_string(j) + " out of range");
    for (std::size_t t = 0; t < s.n_legs; ++t) {
      col[t] = out.samples(Eigen::Index(t), j - 1);
      sq[t] = col[t] * col[t];
    }
    const std::string key = "theta" + std::to_string(j);
    const double e = safe_ess(col);
    s.ess[key] = e;
    if (watch.squares) s.ess[key + "^2"] = safe_ess(sq);
    if (first) {
      s.ess_per_eps = e * epsilon;
      first = false;
    }
  }
  return s;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string summary_csv_header() {
  return "target,scheme,b,eps,L,tau_end,seed,N,accept_rate,mean_dH,neg_dH_frac,"
         "ess_theta1,ess_mid,ess_last,ess_sq1,ess_x_eps,avg_sq_jump,blowups";
}

std::string summary_csv_row(const RunSummary& r) {
  const ChainSummary& s = r.summary;
  auto lookup = [&](std::size_t i, bool square) {
    if (i >= r.watch.size()) return std::numeric_limits<double>::quiet_NaN();
    const std::string key = "theta" + std::to_string(r.watch[i]) + (square ? "^2" : "");
    const auto it = s.ess.find(key);
    return it == s.ess.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
  };
  std::string line;
  line += r.target + ',' + r.scheme + ',' + format_double(r.b) + ',' + format_double(r.epsilon) + ',';
  line += std::to_string(r.steps) + ',' + format_double(r.tau_end) + ',' + std::to_string(r.seed) + ',';
  line += std::to_string(s.n_legs) + ',' + format_double(s.acceptance_rate) + ',';
  line += format_double(s.mean_delta_h) + ',' + format_double(s.neg_dh_fraction) + ',';
  line += format_double(lookup(0, false)) + ',' + format_double(lookup(1, false)) + ',';
  line += format_double(lookup(2, false)) + ',' + format_double(lookup(0, true)) + ',';
  line += format_double(s.ess_per_eps) + ',' + format_double(s.avg_sq_jump) + ',';
  line += std::to_string(s.blowups);
  return line;
}

std::vector<ScatterRow> acceptance_vs_energy_scatter(std::span<const RunSummary> runs) {
  std::vector<ScatterRow> rows;
  for (const RunSummary& r : runs) {
    const double mu = r.summary.mean_delta_h;
    if (!std::isfinite(mu) || mu < 0.0) continue;
    rows.push_back({r.scheme, r.epsilon, mu, r.summary.acceptance_rate,
                    expected_acceptance_univariate(mu), gupta_acceptance(mu)});
  }
  return rows;
}

std::string scatter_csv_header() { return "scheme,eps,mean_dH,accept_rate,theorem1,gupta"; }

std::string scatter_csv_row(const ScatterRow& r) {
  return r.scheme + ',' + format_double(r.epsilon) + ',' + format_double(r.mean_delta_h) + ',' +
         format_double(r.acceptance) + ',' + format_double(r.theorem1) + ',' + format_double(r.gupta);
}

NormalityTest anderson_darling_normal(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 8) throw Error("anderson-darling: need at least 8 values");
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / double(n);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / double(n - 1));
  if (!(sd > 0.0)) throw Error("anderson-darling: zero variance");

  std::vector<double> z(sample.begin(), sample.end());
  std::sort(z.begin(), z.end());
  // log Phi and log(1 - Phi) via erfc to keep the tails accurate.
  auto log_cdf = [](double x) { return std::log(0.5 * std::erfc(-x / std::sqrt(2.0))); };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (z[i] - mean) / sd;
    const double zj = (z[n - 1 - i] - mean) / sd;
    acc += double(2 * i + 1) * (log_cdf(zi) + log_cdf(-zj));
  }
  const double dn = double(n);
  const double a2 = -dn - acc / dn;
  const double a = a2 * (1.0 + 0.75 / dn + 2.25 / (dn * dn));
  double p;
  if (a >= 0.6) {
    p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  return {a2, a, std::clamp(p, 0.0, 1.0)};
}

}  // namespace splithmc
