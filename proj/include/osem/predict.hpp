#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osem/data.hpp"
#include "osem/em.hpp"
#include "osem/latent_model.hpp"
#include "osem/rng.hpp"
#include "osem/tmvn.hpp"

namespace osem {

struct GhkOptions {
  int draws = 2000;  // R, split evenly over the random shifts
  int shifts = 10;
};

struct GhkEstimate {
  double log_prob = 0.0;
  double std_error = 0.0;  // of the probability, from the spread of the shift means
  bool floored = false;    // the estimate was zero and log(1e-300) is reported
};

/// GHK estimator of P(Y in rect) for Y ~ N(0, sigma), using a randomly
/// shifted rank-1 lattice (Richtmyer generators) for the uniforms.
class GhkEstimator {
 public:
  /// Throws NumericError if sigma is not positive definite.
  explicit GhkEstimator(const Eigen::MatrixXd& sigma, GhkOptions options = {});

  int dim() const { return static_cast<int>(chol_.rows()); }
  GhkEstimate estimate(std::span<const Interval> rect, Rng& rng) const;

 private:
  Eigen::MatrixXd chol_;
  GhkOptions options_;
};

GhkEstimate rectangle_log_prob(const Eigen::MatrixXd& sigma, const Thresholds& thresholds,
                               std::span<const int> x, Rng& rng, GhkOptions options = {});

struct LogLossReport {
  double total = 0.0;         // sum of log P(row) over the test rows
  double per_instance = 0.0;  // total / rows (0 for an empty set)
  double std_error = 0.0;     // Monte Carlo error of `total`
  std::vector<double> row_log_prob;
  std::vector<double> row_std_error;  // Monte Carlo error of each row's log probability
  std::size_t floored_rows = 0;
};

/// Held-out log likelihood of `test` under the model's correlation matrix and
/// thresholds. Row j draws from the stream derive_seed(seed, "ghk-row", j).
/// Throws InputError if a test code has no threshold interval.
LogLossReport test_log_loss(const Eigen::MatrixXd& sigma, const Thresholds& thresholds,
                            const OrdinalDataset& test, std::uint64_t seed = 1, GhkOptions options = {});
LogLossReport test_log_loss(const LatentModel& model, const OrdinalDataset& test,
                            std::uint64_t seed = 1, GhkOptions options = {});

struct BootstrapResult {
  int replicates = 0;
  int failures = 0;
  /// frequency(i, j): share of successful fits whose CPDAG has i -> j, with
  /// undirected edges counting 0.5 in each direction.
  Eigen::MatrixXd frequency;
};

/// Nonparametric bootstrap of the CPDAG edges over `replicates` resamples.
/// Failed fits are counted, warned about and left out of the denominator.
BootstrapResult bootstrap_edges(const OrdinalDataset& data, const OsemConfig& config, int replicates);

}  // namespace osem
