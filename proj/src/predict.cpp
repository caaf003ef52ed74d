#include "osem/predict.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "osem/errors.hpp"
#include "osem/log.hpp"
#include "osem/normal.hpp"
#include "osem/parallel.hpp"

namespace osem {

namespace {

constexpr double kProbFloor = 1e-300;

double log_interval_prob(double a, double b) {
  if (!(a < b)) return -std::numeric_limits<double>::infinity();
  if (a > 0.0) return log_interval_prob(-b, -a);
  if (b < -6.0) {
    const double lb = norm_log_cdf(b);
    return lb + std::log1p(-std::exp(norm_log_cdf(a) - lb));
  }
  return std::log(norm_interval_prob(a, b));
}

// sqrt of the first primes; fractional parts give the lattice generators.
double lattice_generator(int dim) {
  static const std::vector<int> primes = [] {
    std::vector<int> out;
    for (int c = 2; out.size() < 512; ++c) {
      bool prime = true;
      for (int p : out) {
        if (p * p > c) break;
        if (c % p == 0) {
          prime = false;
          break;
        }
      }
      if (prime) out.push_back(c);
    }
    return out;
  }();
  if (dim >= static_cast<int>(primes.size())) throw InputError("GHK: dimension too large");
  const double s = std::sqrt(static_cast<double>(primes[dim]));
  return s - std::floor(s);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

GhkEstimator::GhkEstimator(const Eigen::MatrixXd& sigma, GhkOptions options) : options_(options) {
  if (sigma.rows() != sigma.cols()) throw InputError("GHK: sigma must be square");
  if (options.shifts < 2 || options.draws < options.shifts) {
    throw InputError("GHK: need at least two shifts and one draw per shift");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (sigma + sigma.transpose()));
  if (llt.info() != Eigen::Success) throw NumericError("GHK: sigma is not positive definite");
  chol_ = llt.matrixL();
}

GhkEstimate GhkEstimator::estimate(std::span<const Interval> rect, Rng& rng) const {
  const int n = dim();
  if (static_cast<int>(rect.size()) != n) throw InputError("GHK: rectangle dimension mismatch");
  const int per_shift = options_.draws / options_.shifts;
  std::vector<double> generators(n);
  for (int i = 0; i < n; ++i) generators[i] = lattice_generator(i);

  std::vector<double> shift_log_means(options_.shifts);
  std::vector<double> log_w(per_shift);
  std::vector<double> shift(n);
  Eigen::VectorXd e(n);
  for (int s = 0; s < options_.shifts; ++s) {
    for (auto& v : shift) v = uniform01(rng);
    for (int k = 0; k < per_shift; ++k) {
      double lw = 0.0;
      for (int i = 0; i < n && std::isfinite(lw); ++i) {
        double mu = 0.0;
        for (int j = 0; j < i; ++j) mu += chol_(i, j) * e[j];
        const double a = (rect[i].lo - mu) / chol_(i, i);
        const double b = (rect[i].hi - mu) / chol_(i, i);
        lw += log_interval_prob(a, b);
        if (i + 1 < n && std::isfinite(lw)) {
          double u = std::fmod(static_cast<double>(k + 1) * generators[i] + shift[i], 1.0);
          const auto z = truncated_norm_quantile(a, b, u);
          if (!z) {
            lw = -std::numeric_limits<double>::infinity();
          } else {
            e[i] = *z;
          }
        }
      }
      log_w[k] = lw;
    }
    shift_log_means[s] = log_sum_exp(log_w) - std::log(static_cast<double>(per_shift));
  }

  GhkEstimate out;
  const double log_mean = log_sum_exp(shift_log_means) - std::log(static_cast<double>(options_.shifts));
  if (!std::isfinite(log_mean) || log_mean < std::log(kProbFloor)) {
    out.log_prob = std::log(kProbFloor);
    out.floored = true;
    return out;
  }
  // Spread of the shift means relative to their average, kept in scaled form to avoid underflow.
  double var = 0.0;
  for (double l : shift_log_means) {
    const double r = std::exp(l - log_mean) - 1.0;
    var += r * r;
  }
  var /= static_cast<double>(options_.shifts - 1);
  out.log_prob = log_mean;
  out.std_error = std::exp(log_mean) * std::sqrt(var / options_.shifts);
  return out;
}

GhkEstimate rectangle_log_prob(const Eigen::MatrixXd& sigma, const Thresholds& thresholds,
                               std::span<const int> x, Rng& rng, GhkOptions options) {
  if (x.size() != thresholds.size()) throw InputError("rectangle_log_prob: level vector has wrong length");
  const auto rect = observation_rectangle(thresholds, x);
  return GhkEstimator(sigma, options).estimate(rect, rng);
}

LogLossReport test_log_loss(const Eigen::MatrixXd& sigma, const Thresholds& thresholds,
                            const OrdinalDataset& test, std::uint64_t seed, GhkOptions options) {
  LogLossReport report;
  const std::size_t rows = test.rows();
  if (rows == 0) return report;
  if (test.cols() != thresholds.size()) throw InputError("test_log_loss: test set has the wrong number of columns");
  for (std::size_t c = 0; c < test.cols(); ++c) {
    const int limit = thresholds.levels(c);
    for (std::size_t r = 0; r < rows; ++r) {
      if (test.at(r, c) >= limit) {
        throw InputError("test_log_loss: level " + std::to_string(test.at(r, c)) + " of column " +
                         test.names()[c] + " was not seen in training");
      }
    }
  }
  const GhkEstimator ghk(sigma, options);
  std::vector<GhkEstimate> estimates(rows);
  parallel_for(rows, [&](std::size_t r) {
    Rng rng = make_rng(seed, "ghk-row", r);
    estimates[r] = ghk.estimate(observation_rectangle(thresholds, test.row(r)), rng);
  });

  double var = 0.0;
  report.row_log_prob.resize(rows);
  report.row_std_error.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& est = estimates[r];
    report.row_log_prob[r] = est.log_prob;
    // Delta method: se(log p) = se(p) / p.
    report.row_std_error[r] = est.floored ? 0.0 : est.std_error / std::exp(est.log_prob);
    var += report.row_std_error[r] * report.row_std_error[r];
    report.total += est.log_prob;
    if (est.floored) ++report.floored_rows;
  }
  if (report.floored_rows > 0) {
    warn("test_log_loss: " + std::to_string(report.floored_rows) +
         " rows have zero estimated probability; floored at 1e-300");
  }
  report.std_error = std::sqrt(var);
  report.per_instance = report.total / static_cast<double>(rows);
  return report;
}

LogLossReport test_log_loss(const LatentModel& model, const OrdinalDataset& test, std::uint64_t seed,
                            GhkOptions options) {
  return test_log_loss(model.sigma, model.thresholds, test, seed, options);
}

BootstrapResult bootstrap_edges(const OrdinalDataset& data, const OsemConfig& config, int replicates) {
  if (replicates < 1) throw InputError("bootstrap: B must be >= 1");
  config.validate();
  const auto n = static_cast<Eigen::Index>(data.cols());
  const std::size_t rows = data.rows();
  if (rows == 0) throw InputError("bootstrap: empty dataset");

  std::vector<std::optional<Cpdag>> fits(replicates);
  std::vector<std::string> errors(replicates);
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t b) {
    Rng rng = make_rng(config.seed, "bootstrap-rows", b);
    std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
    std::vector<std::size_t> idx(rows);
    for (auto& i : idx) i = pick(rng);
    OsemConfig replicate = config;
    replicate.seed = derive_seed(config.seed, "bootstrap-fit", b);
    try {
      fits[b] = osem_fit(data.select_rows(idx), replicate).cpdag;
    } catch (const Error& e) {
      errors[b] = e.what();
    }
  });

  BootstrapResult result;
  result.replicates = replicates;
  result.frequency = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < replicates; ++b) {
    if (!fits[b]) {
      ++result.failures;
      warn("bootstrap: replicate " + std::to_string(b) + " failed: " + errors[b]);
      continue;
    }
    for (const auto& e : fits[b]->directed_edges()) result.frequency(e.from, e.to) += 1.0;
    for (const auto& [a, c] : fits[b]->undirected_edges()) {
      result.frequency(a, c) += 0.5;
      result.frequency(c, a) += 0.5;
    }
  }
  const int successes = replicates - result.failures;
  if (successes > 0) result.frequency /= static_cast<double>(successes);
  return result;
}

}  // namespace osem
