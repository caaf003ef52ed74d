#include "osem/em.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "osem/errors.hpp"
#include "osem/init.hpp"
#include "osem/log.hpp"
#include "osem/rng.hpp"
#include "osem/scoring.hpp"
#include "osem/search.hpp"

namespace osem {

namespace {

constexpr double kVarianceFloor = 1e-8;
constexpr double kRidgeJitter = 1e-8;

std::vector<int> subset_of(const std::vector<int>& items, std::uint32_t mask) {
  std::vector<int> out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (mask >> k & 1u) out.push_back(items[k]);
  }
  return out;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) out(a, b) = m(rows[a], cols[b]);
  }
  return out;
}

// Solves gram * b = rhs; falls back to a jittered ridge solve if gram is singular.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                       int node, bool* ridged = nullptr) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd b = llt.solve(rhs);
    if (b.allFinite()) return b;
  }
  if (ridged) *ridged = true;
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd jittered = gram;
  jittered.diagonal().array() += kRidgeJitter * scale;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(jittered);
  Eigen::VectorXd b = ldlt.solve(rhs);
  if (!b.allFinite()) {
    throw NumericError("update_parameters: regression of node " + std::to_string(node) +
                       " is singular even after ridge jitter");
  }
  return b;
}

double residual_sum_of_squares(const Eigen::MatrixXd& samples, int node,
                               const std::vector<int>& parents, const Eigen::VectorXd& coefficients) {
  Eigen::VectorXd residual = samples.col(node);
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (coefficients[k] != 0.0) residual -= coefficients[k] * samples.col(parents[k]);
  }
  return residual.squaredNorm();
}

}  // namespace

void OsemConfig::validate() const {
  if (mc_samples < 1) throw InputError("config: K must be >= 1");
  if (!(penalty >= 0.0)) throw InputError("config: lambda must be >= 0");
  if (max_iter < 0) throw InputError("config: max_iter must be >= 0");
  if (!(tol > 0.0)) throw InputError("config: tol must be > 0");
  if (burn_in < 0) throw InputError("config: burn_in must be >= 0");
  if (thin < 1) throw InputError("config: thin must be >= 1");
  if (restarts < 0) throw InputError("config: restarts must be >= 0");
  if (max_parents && *max_parents < 0) throw InputError("config: max_parents must be >= 0");
  if (subset_limit < 0 || subset_limit > 20) throw InputError("config: subset_limit must lie in [0, 20]");
}

ParamSet recover_node_params(const Eigen::MatrixXd& sigma, const Dag& dag) {
  if (sigma.rows() != dag.size() || sigma.cols() != dag.size()) {
    throw InputError("recover_node_params: dimension mismatch");
  }
  ParamSet params(dag.size());
  for (int i = 0; i < dag.size(); ++i) {
    const auto& pa = dag.parents(i);
    auto& p = params[i];
    p.parents = pa;
    if (pa.empty()) {
      p.coefficients.resize(0);
      p.variance = sigma(i, i);
    } else {
      const Eigen::MatrixXd block = gather(sigma, pa, pa);
      const Eigen::VectorXd cross = gather(sigma, pa, {i});
      Eigen::LLT<Eigen::MatrixXd> llt(block);
      if (llt.info() != Eigen::Success) {
        throw NumericError("recover_node_params: parent block of node " + std::to_string(i) +
                           " is singular");
      }
      p.coefficients = llt.solve(cross);
      p.variance = sigma(i, i) - cross.dot(p.coefficients);
    }
    if (!(p.variance > 0.0)) {
      throw NumericError("recover_node_params: non-positive conditional variance at node " +
                         std::to_string(i));
    }
  }
  return params;
}

Eigen::MatrixXd rescale_to_correlation(const ParamSet& params, const Dag& dag) {
  return covariance_to_correlation(params_to_covariance(params, dag)).correlation;
}

ParamSet update_parameters(const Dag& dag, const LatentSampleBlock& block, double penalty,
                           int subset_limit) {
  const auto& y = block.samples;
  if (y.cols() != dag.size()) throw InputError("update_parameters: dimension mismatch");
  if (y.rows() == 0) throw InputError("update_parameters: empty sample block");
  const double rows = static_cast<double>(y.rows());
  const double n_obs = static_cast<double>(block.observations);
  const double log_n = std::log(n_obs);
  const Eigen::MatrixXd gram = y.transpose() * y;

  ParamSet params(dag.size());
  for (int i : topological_order(dag)) {
    const auto& pa = dag.parents(i);
    auto& p = params[i];
    p.parents = pa;
    p.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pa.size()));
    if (pa.empty()) {
      p.variance = std::max(gram(i, i) / rows, kVarianceFloor);
      continue;
    }

    bool ridged = false;
    std::uint32_t chosen = (1u << pa.size()) - 1u;
    if (static_cast<int>(pa.size()) <= subset_limit) {
      // Best subset under -(N/2) log v - lambda (log N / 2)(|S| + 1), via the pooled Gram matrix.
      double best = std::numeric_limits<double>::infinity();
      for (std::uint32_t mask = 0; mask < (1u << pa.size()); ++mask) {
        const auto sub = subset_of(pa, mask);
        double rss = gram(i, i);
        if (!sub.empty()) {
          const Eigen::VectorXd cross = gather(gram, sub, {i});
          rss -= cross.dot(solve_normal_equations(gather(gram, sub, sub), cross, i, &ridged));
        }
        const double v = std::max(rss / rows, kVarianceFloor);
        const double criterion =
            0.5 * n_obs * std::log(v) + penalty * 0.5 * log_n * static_cast<double>(sub.size() + 1);
        if (criterion < best) {
          best = criterion;
          chosen = mask;
        }
      }
    }
    const auto sub = subset_of(pa, chosen);
    if (!sub.empty()) {
      const Eigen::VectorXd b =
          solve_normal_equations(gather(gram, sub, sub), gather(gram, sub, {i}), i, &ridged);
      for (std::size_t k = 0, s = 0; k < pa.size(); ++k) {
        if (chosen >> k & 1u) p.coefficients[k] = b[s++];
      }
    }
    if (ridged) warn("update_parameters: rank-deficient design at node " + std::to_string(i) + "; ridge fallback used");
    p.variance = std::max(residual_sum_of_squares(y, i, pa, p.coefficients) / rows, kVarianceFloor);
  }
  return params;
}

double penalized_q(const ParamSet& params, const LatentSampleBlock& block, double penalty) {
  const auto& y = block.samples;
  const double rows = static_cast<double>(y.rows());
  const double n_obs = static_cast<double>(block.observations);
  const double log_n = std::log(n_obs);
  double q = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const double rss = residual_sum_of_squares(y, static_cast<int>(i), p.parents, p.coefficients);
    const auto nonzero = (p.coefficients.array() != 0.0).count();
    q += -0.5 * n_obs * (std::log(2.0 * std::numbers::pi * p.variance) + rss / (rows * p.variance)) -
         penalty * 0.5 * log_n * static_cast<double>(nonzero + 1);
  }
  return q;
}

OsemResult osem_fit(const OrdinalDataset& raw, const OsemConfig& config) {
  config.validate();
  if (raw.cols() < 1) throw InputError("osem_fit: dataset has no columns");
  if (raw.rows() < 2) throw InputError("osem_fit: need at least two observations");
  require_non_degenerate(raw);
  const OrdinalDataset data = merge_unobserved_levels(raw);
  const int n = static_cast<int>(data.cols());
  const double n_obs = static_cast<double>(data.rows());

  using clock = std::chrono::steady_clock;
  auto started = clock::now();
  const Initialization init = initialize(data);

  Dag dag = Dag::complete(n);
  Eigen::MatrixXd sigma = init.sigma;
  ParamSet params = recover_node_params(sigma, dag);

  FitTrace trace;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  trace.entries.push_back({0, nan, nan, nan, nan, dag, sigma, nan,
                           std::chrono::duration<double>(clock::now() - started).count()});
  trace.stop_reason = "max-iter";

  const GibbsOptions gibbs{config.mc_samples, config.burn_in, config.thin};
  int stalled = 0;
  double previous_score = nan;
  for (int t = 1; t <= config.max_iter; ++t) {
    started = clock::now();
    const std::uint64_t sample_seed = derive_seed(config.seed, "e-step", t);
    const LatentSampleBlock block = sample_latent_block(data, init.thresholds, sigma, gibbs, sample_seed);

    const ScoreContext context(covariance_to_correlation(block.sigma_hat).correlation, n_obs,
                               config.penalty);
    const double score_before = context.total_score(dag);
    const SearchResult found = search_structure(
        context, dag, {config.restarts, config.max_parents, derive_seed(config.seed, "search", t)});

    const double q_before = penalized_q(recover_node_params(sigma, found.dag), block, config.penalty);
    const ParamSet updated = update_parameters(found.dag, block, config.penalty, config.subset_limit);
    const double q_after = penalized_q(updated, block, config.penalty);

    const auto scaled = covariance_to_correlation(params_to_covariance(updated, found.dag));
    const double change = (scaled.correlation - sigma).cwiseAbs().maxCoeff();
    const bool same_structure = found.dag == dag;
    const bool score_flat = std::isfinite(previous_score) && std::abs(found.score - previous_score) < 1e-4;

    dag = found.dag;
    sigma = scaled.correlation;
    params = rescale_params(updated, scaled.scale);
    previous_score = found.score;
    trace.entries.push_back({t, found.score, score_before, q_before, q_after, dag, sigma, change,
                             std::chrono::duration<double>(clock::now() - started).count(), sample_seed});

    if (change < config.tol) {
      trace.stop_reason = "sigma-converged";
      break;
    }
    stalled = same_structure && score_flat ? stalled + 1 : 0;
    if (stalled >= 3) {
      trace.stop_reason = "structure-stalled";
      break;
    }
  }

  OsemResult result;
  result.dag = dag;
  result.cpdag = dag_to_cpdag(dag);
  result.model = LatentModel{dag, init.thresholds, sigma, params};
  result.trace = std::move(trace);
  return result;
}

}  // namespace osem
