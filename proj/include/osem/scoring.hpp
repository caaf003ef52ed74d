#pragma once

#include <cstddef>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "osem/graph.hpp"

namespace osem {

/// Expected BIC score of a Gaussian DAG given an expected covariance matrix:
///
///   score(i, pa) = -(N/2) log(S_ii - S_i,pa S_pa,pa^{-1} S_pa,i) - lambda (log N / 2)(|pa| + 1)
///
/// Local scores are memoized per (node, parent set); lookups and insertions
/// are safe from several threads.
class ScoreContext {
 public:
  ScoreContext(Eigen::MatrixXd sigma_hat, double sample_count, double penalty);

  ScoreContext(const ScoreContext&) = delete;
  ScoreContext& operator=(const ScoreContext&) = delete;

  /// Cached local score. `parents` need not be sorted.
  double node_score(int node, std::span<const int> parents) const;
  /// Uncached evaluation (the value node_score caches).
  double evaluate(int node, std::span<const int> parents) const;
  double total_score(const Dag& dag) const;

  int size() const { return static_cast<int>(sigma_hat_.rows()); }
  const Eigen::MatrixXd& sigma_hat() const { return sigma_hat_; }
  double sample_count() const { return sample_count_; }
  double penalty() const { return penalty_; }
  std::size_t cache_size() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& key) const noexcept;
  };

  Eigen::MatrixXd sigma_hat_;
  double sample_count_;
  double penalty_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::vector<int>, double, KeyHash> cache_;
};

}  // namespace osem
