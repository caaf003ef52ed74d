#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "osem/data.hpp"
#include "osem/graph.hpp"
#include "osem/latent_model.hpp"
#include "osem/rng.hpp"

namespace osem {

/// N x n draws of the linear Gaussian SEM on a weighted DAG with unit noise
/// variances. Throws StructuralError if an edge has no weight.
Eigen::MatrixXd generate_gaussian(const Dag& dag, std::size_t rows, Rng& rng);

/// Symmetric Dirichlet(nu, ..., nu) of dimension `levels`.
std::vector<double> dirichlet_cell_probs(int levels, double nu, Rng& rng);

struct Discretized {
  OrdinalDataset data;
  Thresholds thresholds;  // cut points on the standardized scale
};

/// Standardizes each column by its sample mean and sd, then cuts at
/// Phi^{-1} of the cumulative cell probabilities.
Discretized discretize(const Eigen::MatrixXd& gauss, const std::vector<std::vector<double>>& cell_probs);

/// Correlation implied by the DAG weights with unit noise variances.
Eigen::MatrixXd true_correlation(const Dag& dag);

struct BenchmarkSpec {
  int n = 12;
  double d = 4.0;            // expected neighbours
  std::size_t rows = 500;    // N
  int expected_levels = 3;   // E[L]; L_i ~ U{2, ..., 2 E[L] - 2}
  double nu = 2.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Benchmark {
  Dag dag;
  Eigen::MatrixXd sigma;
  OrdinalDataset data;
  Thresholds thresholds;
  std::vector<std::vector<double>> cell_probs;
};

Benchmark make_benchmark(const BenchmarkSpec& spec);

}  // namespace osem
