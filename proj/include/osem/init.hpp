#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osem/data.hpp"
#include "osem/latent_model.hpp"

namespace osem {

/// Normal quantiles of the empirical cumulative level frequencies. Cumulative
/// fractions are clamped to [1/(2N), 1 - 1/(2N)]; a cut that would not exceed
/// its predecessor (an empty interior level) is nudged up by 1e-6.
Thresholds estimate_thresholds(const OrdinalDataset& data);

/// P(lo1 <= Z1 < hi1, lo2 <= Z2 < hi2) for a standard bivariate normal with
/// correlation rho. Infinite bounds allowed. Throws NumericError if |rho| >= 1.
double bivariate_rectangle_prob(double lo1, double hi1, double lo2, double hi2, double rho);

/// Contingency counts table(a, b) = #{rows : x_i = a, x_j = b}.
Eigen::MatrixXd contingency_table(std::span<const int> col_i, std::span<const int> col_j,
                                  int levels_i, int levels_j);

/// sum_ab n_ab log P(cell ab | rho), cells with zero count skipped.
double pairwise_log_likelihood(const Eigen::MatrixXd& table, const std::vector<double>& cuts_i,
                               const std::vector<double>& cuts_j, double rho);

/// Polychoric correlation: maximizer of the pairwise likelihood over
/// [-1 + 1e-6, 1 - 1e-6] by Brent's bounded minimization.
double pairwise_correlation(std::span<const int> col_i, std::span<const int> col_j,
                            const std::vector<double>& cuts_i, const std::vector<double>& cuts_j);

/// Clips eigenvalues below `floor` up to `floor` and rescales to unit diagonal.
/// Inputs with no eigenvalue below the floor are returned unchanged.
Eigen::MatrixXd smooth_to_pd(const Eigen::MatrixXd& m, double floor = 1e-4);

struct Initialization {
  Thresholds thresholds;
  Eigen::MatrixXd sigma;
};

/// Thresholds plus the smoothed matrix of pairwise polychoric correlations.
/// Pairs are estimated in parallel.
Initialization initialize(const OrdinalDataset& data);

}  // namespace osem
