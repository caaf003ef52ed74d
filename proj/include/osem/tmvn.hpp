#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osem/data.hpp"
#include "osem/latent_model.hpp"
#include "osem/rng.hpp"

namespace osem {

/// Half-open interval [lo, hi); either end may be infinite.
struct Interval {
  double lo;
  double hi;
};

/// Rectangle of latent values consistent with observation `x`.
std::vector<Interval> observation_rectangle(const Thresholds& thresholds, std::span<const int> x);

/// One draw from N(mean, sd^2) conditioned on [lo, hi) by inverse CDF. If the
/// interval has no mass at working precision the midpoint (or the finite end)
/// is returned and a warning is issued.
double sample_truncated_univariate(double mean, double sd, double lo, double hi, Rng& rng);

struct GibbsOptions {
  int draws = 5;    // K
  int burn_in = 50;
  int thin = 5;
};

/// Full conditionals of N(0, sigma): Y_i | y_-i ~ N(sum_j weight(i, j) y_j, sd_i^2)
/// with weight(i, j) = -Omega_ij / Omega_ii and sd_i = Omega_ii^{-1/2}.
class GibbsKernel {
 public:
  /// Throws NumericError if sigma is not positive definite.
  explicit GibbsKernel(const Eigen::MatrixXd& sigma);

  int dim() const { return static_cast<int>(sd_.size()); }
  double conditional_mean(int i, const Eigen::VectorXd& y) const;
  double conditional_sd(int i) const { return sd_[i]; }

 private:
  Eigen::MatrixXd weights_;  // zero diagonal
  Eigen::VectorXd sd_;
};

/// Systematic-scan Gibbs sampler for N(0, sigma) truncated to `rect`. Starts
/// at the coordinatewise median of the truncated marginals, discards burn_in
/// sweeps, then keeps one state every `thin` sweeps. Returns draws x n.
Eigen::MatrixXd gibbs_sample_row(const GibbsKernel& kernel, std::span<const Interval> rect,
                                 const GibbsOptions& options, Rng& rng);
Eigen::MatrixXd gibbs_sample_row(const Eigen::MatrixXd& sigma, std::span<const Interval> rect,
                                 const GibbsOptions& options, Rng& rng);

/// K completions of each of the N observations, stored as (N*K) x n with row
/// j*K + k holding completion k of observation j.
struct LatentSampleBlock {
  std::size_t observations = 0;
  int draws = 0;
  Eigen::MatrixXd samples;
  Eigen::MatrixXd sigma_hat;
  std::uint64_t seed = 0;

  auto completion(std::size_t j, int k) const { return samples.row(j * draws + k); }
};

/// Second-moment matrix (1/M) sum_m y_m y_m^T over the rows of `samples`.
Eigen::MatrixXd expected_covariance(const Eigen::MatrixXd& samples);

/// Samples every observation under (sigma, thresholds). Row j uses the stream
/// derive_seed(seed, "tmvn-row", j), so the block is identical for any thread count.
LatentSampleBlock sample_latent_block(const OrdinalDataset& data, const Thresholds& thresholds,
                                      const Eigen::MatrixXd& sigma, const GibbsOptions& options,
                                      std::uint64_t seed);

}  // namespace osem
