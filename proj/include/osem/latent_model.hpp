#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osem/graph.hpp"

namespace osem {

/// Per-variable interior cut points alpha(i,1) < ... < alpha(i,L_i-1); the
/// outer cuts -inf / +inf are implicit. Level l occupies [alpha(i,l), alpha(i,l+1)).
class Thresholds {
 public:
  Thresholds() = default;
  /// Throws InputError unless every vector is finite and strictly increasing.
  explicit Thresholds(std::vector<std::vector<double>> interior_cuts);

  std::size_t size() const { return cuts_.size(); }
  int levels(std::size_t var) const { return static_cast<int>(cuts_[var].size()) + 1; }
  double lower(std::size_t var, int level) const;
  double upper(std::size_t var, int level) const;
  const std::vector<double>& cuts(std::size_t var) const { return cuts_[var]; }
  const std::vector<std::vector<double>>& all() const { return cuts_; }

 private:
  std::vector<std::vector<double>> cuts_;
};

/// Regression form of one node: Y_i = sum_j b_ji Y_j + e_i, e_i ~ N(0, variance).
struct NodeParams {
  std::vector<int> parents;  // sorted, equal to the DAG parent set
  Eigen::VectorXd coefficients;
  double variance = 1.0;
};

using ParamSet = std::vector<NodeParams>;

/// Zero coefficients and unit variances on every node of `dag`.
ParamSet unit_params(const Dag& dag);

/// (I - B)^{-1} V (I - B)^{-T} with B(i, j) = b_ji and V = diag(v).
Eigen::MatrixXd params_to_covariance(const ParamSet& params, const Dag& dag);

struct ScaledCorrelation {
  Eigen::MatrixXd correlation;
  Eigen::VectorXd scale;  // sqrt of the input diagonal
};

ScaledCorrelation covariance_to_correlation(const Eigen::MatrixXd& covariance);

/// Regression parameters after the latent variables are rescaled by 1/scale.
ParamSet rescale_params(const ParamSet& params, const Eigen::VectorXd& scale);

/// Cholesky of the symmetrized matrix succeeds.
bool is_positive_definite(const Eigen::MatrixXd& m);
bool is_correlation_matrix(const Eigen::MatrixXd& m, double tol = 1e-9);

/// Thresholds, DAG, correlation matrix and the matching per-node parameters.
struct LatentModel {
  Dag dag;
  Thresholds thresholds;
  Eigen::MatrixXd sigma;
  ParamSet node_params;
};

/// log N(y | 0, sigma) if y lies in the rectangle coded by x, else -inf.
double complete_log_density(const Eigen::VectorXd& y, std::span<const int> x,
                            const LatentModel& model);

}  // namespace osem
