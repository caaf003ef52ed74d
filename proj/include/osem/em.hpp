#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osem/data.hpp"
#include "osem/graph.hpp"
#include "osem/latent_model.hpp"
#include "osem/tmvn.hpp"

namespace osem {

struct OsemConfig {
  int mc_samples = 5;        // K
  double penalty = 6.0;      // lambda
  int max_iter = 50;
  double tol = 1e-3;         // max-abs change of the correlation matrix
  int burn_in = 50;
  int thin = 5;
  int restarts = 100;
  std::optional<int> max_parents;
  int subset_limit = 8;      // best-subset refinement up to this many parents
  std::uint64_t seed = 1;

  /// Throws InputError if any field is out of range.
  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  /// Expected score of the structure chosen this iteration (NaN for the initialization).
  double score = 0.0;
  /// Expected score of the previous structure under this iteration's sample block.
  double score_before = 0.0;
  /// Penalized Q of the previous parameters restricted to the new structure, and after the update.
  double q_before = 0.0;
  double q_after = 0.0;
  Dag dag;
  Eigen::MatrixXd sigma;
  double sigma_change = 0.0;
  double seconds = 0.0;
  std::uint64_t sample_seed = 0;  // seed of this iteration's Gibbs block
};

struct FitTrace {
  std::vector<TraceEntry> entries;
  std::string stop_reason;
};

struct OsemResult {
  Dag dag;
  Cpdag cpdag;
  LatentModel model;
  FitTrace trace;
};

/// Regression coefficients implied by `sigma` under `dag`:
/// b_i = S_pa,pa^{-1} S_pa,i, v_i = S_ii - S_i,pa b_i.
ParamSet recover_node_params(const Eigen::MatrixXd& sigma, const Dag& dag);

/// Covariance implied by the parameters, rescaled to correlation form.
Eigen::MatrixXd rescale_to_correlation(const ParamSet& params, const Dag& dag);

/// Conditional maximization of the expected complete-data log-likelihood:
/// pooled least squares of each node on its parents over all completions,
/// followed by best-subset selection under the BIC penalty when the parent set
/// has at most `subset_limit` members. Dropped parents keep a zero coefficient.
ParamSet update_parameters(const Dag& dag, const LatentSampleBlock& block, double penalty,
                           int subset_limit = 8);

/// Penalized expected complete-data log-likelihood of `params`:
/// sum_i -(N/2)(log(2 pi v_i) + RSS_i / (N K v_i)) - lambda (log N / 2)(nnz(b_i) + 1).
double penalized_q(const ParamSet& params, const LatentSampleBlock& block, double penalty);

/// Ordinal Structural EM: threshold + pairwise initialization, then repeated
/// (Gibbs E-step, structure search, parameter update, rescale) until the
/// correlation matrix stabilizes, the structure and score stall for three
/// iterations, or max_iter is reached.
OsemResult osem_fit(const OrdinalDataset& data, const OsemConfig& config = {});

}  // namespace osem
