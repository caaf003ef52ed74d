#include "osem/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "osem/errors.hpp"
#include "osem/normal.hpp"

namespace osem {

Eigen::MatrixXd generate_gaussian(const Dag& dag, std::size_t rows, Rng& rng) {
  const int n = dag.size();
  for (const auto& e : dag.edges()) {
    if (!dag.weight(e.from, e.to)) {
      throw StructuralError("generate_gaussian: edge " + std::to_string(e.from) + "->" +
                            std::to_string(e.to) + " has no weight");
    }
  }
  const auto order = topological_order(dag);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd y(rows, n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (int i : order) {
      double value = noise(rng);
      for (int p : dag.parents(i)) value += *dag.weight(p, i) * y(r, p);
      y(r, i) = value;
    }
  }
  return y;
}

std::vector<double> dirichlet_cell_probs(int levels, double nu, Rng& rng) {
  if (levels < 2) throw InputError("dirichlet_cell_probs: need at least two levels");
  if (!(nu > 0.0)) throw InputError("dirichlet_cell_probs: nu must be positive");
  std::gamma_distribution<double> gamma(nu, 1.0);
  std::vector<double> p(levels);
  double total = 0.0;
  // Tiny shapes can underflow every draw to zero; redraw in that case.
  while (!(total > 0.0)) {
    total = 0.0;
    for (auto& x : p) total += x = gamma(rng);
  }
  for (auto& x : p) x /= total;
  return p;
}

Discretized discretize(const Eigen::MatrixXd& gauss, const std::vector<std::vector<double>>& cell_probs) {
  const auto rows = static_cast<std::size_t>(gauss.rows());
  const auto n = static_cast<std::size_t>(gauss.cols());
  if (cell_probs.size() != n) throw InputError("discretize: one probability vector per column required");
  if (rows < 2) throw InputError("discretize: need at least two rows");

  std::vector<std::vector<double>> cuts(n);
  std::vector<int> levels(n);
  std::vector<int> codes(rows * n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& probs = cell_probs[c];
    if (probs.size() < 2) throw InputError("discretize: column " + std::to_string(c) + " needs >= 2 cells");
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw InputError("discretize: negative cell probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InputError("discretize: cell probabilities must sum to 1");

    const double mean = gauss.col(c).mean();
    const double sd = std::sqrt((gauss.col(c).array() - mean).square().sum() / static_cast<double>(rows - 1));
    if (!(sd > 0.0)) throw InputError("discretize: column " + std::to_string(c) + " has zero variance");

    // Cells with underflowing mass would produce coincident cuts; keep them strictly increasing.
    double cumulative = 0.0;
    for (std::size_t l = 0; l + 1 < probs.size(); ++l) {
      cumulative += probs[l];
      double cut = norm_quantile(std::clamp(cumulative, 1e-300, 1.0 - 1e-16));
      if (!cuts[c].empty() && cut <= cuts[c].back()) cut = std::nextafter(cuts[c].back(), INFINITY);
      cuts[c].push_back(cut);
    }
    levels[c] = static_cast<int>(probs.size());
    for (std::size_t r = 0; r < rows; ++r) {
      const double z = (gauss(r, c) - mean) / sd;
      codes[r * n + c] = static_cast<int>(std::upper_bound(cuts[c].begin(), cuts[c].end(), z) - cuts[c].begin());
    }
  }
  return {OrdinalDataset(default_names(n), std::move(levels), std::move(codes)), Thresholds(std::move(cuts))};
}

Eigen::MatrixXd true_correlation(const Dag& dag) {
  ParamSet params = unit_params(dag);
  for (int i = 0; i < dag.size(); ++i) {
    const auto& pa = dag.parents(i);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      const auto w = dag.weight(pa[k], i);
      if (!w) throw StructuralError("true_correlation: unweighted edge");
      params[i].coefficients[k] = *w;
    }
  }
  return covariance_to_correlation(params_to_covariance(params, dag)).correlation;
}

void BenchmarkSpec::validate() const {
  if (n < 2) throw InputError("benchmark: n must be >= 2");
  if (!(d > 0.0) || d > n - 1) throw InputError("benchmark: d must lie in (0, n - 1]");
  if (rows < 2) throw InputError("benchmark: N must be >= 2");
  if (expected_levels < 2) throw InputError("benchmark: expected levels must be >= 2");
  if (!(nu > 0.0)) throw InputError("benchmark: nu must be positive");
}

Benchmark make_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  Benchmark out;
  Rng graph_rng = make_rng(spec.seed, "benchmark-dag");
  out.dag = random_dag(spec.n, spec.d, graph_rng);
  out.sigma = true_correlation(out.dag);

  Rng data_rng = make_rng(spec.seed, "benchmark-gauss");
  const Eigen::MatrixXd gauss = generate_gaussian(out.dag, spec.rows, data_rng);

  Rng level_rng = make_rng(spec.seed, "benchmark-levels");
  std::uniform_int_distribution<int> level_dist(2, 2 * spec.expected_levels - 2);
  out.cell_probs.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const int levels = level_dist(level_rng);
    out.cell_probs[i] = dirichlet_cell_probs(levels, spec.nu, level_rng);
  }
  auto cut = discretize(gauss, out.cell_probs);
  out.data = std::move(cut.data);
  out.thresholds = std::move(cut.thresholds);
  return out;
}

}  // namespace osem
