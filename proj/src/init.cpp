#include "osem/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "osem/errors.hpp"
#include "osem/log.hpp"
#include "osem/normal.hpp"
#include "osem/parallel.hpp"

namespace osem {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMargin = 1e-6;
constexpr double kProbFloor = 1e-300;

std::vector<double> with_infinite_ends(const std::vector<double>& cuts) {
  std::vector<double> out;
  out.reserve(cuts.size() + 2);
  out.push_back(-kInf);
  out.insert(out.end(), cuts.begin(), cuts.end());
  out.push_back(kInf);
  return out;
}
}  // namespace

Thresholds estimate_thresholds(const OrdinalDataset& data) {
  const std::size_t n_rows = data.rows();
  if (n_rows == 0) throw InputError("estimate_thresholds: empty dataset");
  const double total = static_cast<double>(n_rows);
  const double clamp_lo = 0.5 / total;
  const double clamp_hi = 1.0 - 0.5 / total;
  std::vector<std::vector<double>> cuts(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    const int levels = data.levels()[c];
    std::vector<std::size_t> counts(levels, 0);
    for (std::size_t r = 0; r < n_rows; ++r) ++counts[data.at(r, c)];
    std::size_t cumulative = 0;
    bool nudged = false;
    for (int l = 1; l < levels; ++l) {
      cumulative += counts[l - 1];
      const double frac = std::clamp(static_cast<double>(cumulative) / total, clamp_lo, clamp_hi);
      double cut = norm_quantile(frac);
      if (!cuts[c].empty() && !(cut > cuts[c].back())) {
        cut = cuts[c].back() + 1e-6;
        nudged = true;
      }
      cuts[c].push_back(cut);
    }
    if (nudged) {
      warn("column '" + data.names()[c] + "' has unobserved levels; empty threshold intervals widened to 1e-6");
    }
  }
  return Thresholds(std::move(cuts));
}

double bivariate_rectangle_prob(double lo1, double hi1, double lo2, double hi2, double rho) {
  if (!(std::abs(rho) < 1.0)) throw NumericError("bivariate_rectangle_prob: |rho| must be < 1");
  if (!(lo1 < hi1) || !(lo2 < hi2)) return 0.0;
  const double p = bvn_cdf(hi1, hi2, rho) - bvn_cdf(lo1, hi2, rho) - bvn_cdf(hi1, lo2, rho) +
                   bvn_cdf(lo1, lo2, rho);
  return std::clamp(p, 0.0, 1.0);
}

Eigen::MatrixXd contingency_table(std::span<const int> col_i, std::span<const int> col_j,
                                  int levels_i, int levels_j) {
  if (col_i.size() != col_j.size()) throw InputError("contingency_table: column lengths differ");
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(levels_i, levels_j);
  for (std::size_t r = 0; r < col_i.size(); ++r) {
    const int a = col_i[r];
    const int b = col_j[r];
    if (a < 0 || a >= levels_i || b < 0 || b >= levels_j) {
      throw InputError("contingency_table: level code outside the threshold range");
    }
    table(a, b) += 1.0;
  }
  return table;
}

double pairwise_log_likelihood(const Eigen::MatrixXd& table, const std::vector<double>& cuts_i,
                               const std::vector<double>& cuts_j, double rho) {
  const auto ai = with_infinite_ends(cuts_i);
  const auto aj = with_infinite_ends(cuts_j);
  const auto li = static_cast<Eigen::Index>(ai.size());
  const auto lj = static_cast<Eigen::Index>(aj.size());
  // CDF on the grid of cut points; cell probabilities by inclusion-exclusion.
  Eigen::MatrixXd grid(li, lj);
  for (Eigen::Index a = 0; a < li; ++a) {
    for (Eigen::Index b = 0; b < lj; ++b) grid(a, b) = bvn_cdf(ai[a], aj[b], rho);
  }
  double ll = 0.0;
  for (Eigen::Index a = 0; a < table.rows(); ++a) {
    for (Eigen::Index b = 0; b < table.cols(); ++b) {
      if (table(a, b) <= 0.0) continue;
      const double p = grid(a + 1, b + 1) - grid(a, b + 1) - grid(a + 1, b) + grid(a, b);
      ll += table(a, b) * std::log(std::max(p, kProbFloor));
    }
  }
  return ll;
}

double pairwise_correlation(std::span<const int> col_i, std::span<const int> col_j,
                            const std::vector<double>& cuts_i, const std::vector<double>& cuts_j) {
  const Eigen::MatrixXd table = contingency_table(col_i, col_j, static_cast<int>(cuts_i.size()) + 1,
                                                  static_cast<int>(cuts_j.size()) + 1);
  bool any_finite = false;
  auto objective = [&](double rho) {
    const double ll = pairwise_log_likelihood(table, cuts_i, cuts_j, rho);
    if (std::isfinite(ll)) {
      any_finite = true;
      return -ll;
    }
    return std::numeric_limits<double>::max();
  };
  constexpr int bits = std::numeric_limits<double>::digits / 2;
  const auto [rho, value] =
      boost::math::tools::brent_find_minima(objective, -1.0 + kRhoMargin, 1.0 - kRhoMargin, bits);
  if (!any_finite || !std::isfinite(value)) {
    throw NumericError("pairwise_correlation: likelihood is non-finite over the whole range");
  }
  return rho;
}

Eigen::MatrixXd smooth_to_pd(const Eigen::MatrixXd& m, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericError("smooth_to_pd: eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() >= floor) return m;
  values = values.cwiseMax(floor);
  Eigen::MatrixXd rebuilt = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd inv_sd = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
  rebuilt = inv_sd.asDiagonal() * rebuilt * inv_sd.asDiagonal();
  rebuilt = 0.5 * (rebuilt + rebuilt.transpose());
  rebuilt.diagonal().setOnes();
  return rebuilt;
}

Initialization initialize(const OrdinalDataset& data) {
  Initialization init{estimate_thresholds(data), {}};
  const auto n = static_cast<int>(data.cols());
  std::vector<std::vector<int>> columns(n);
  for (int i = 0; i < n; ++i) columns[i] = data.column(i);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> rho(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    rho[k] = pairwise_correlation(columns[i], columns[j], init.thresholds.cuts(i),
                                  init.thresholds.cuts(j));
  });
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    sigma(pairs[k].first, pairs[k].second) = rho[k];
    sigma(pairs[k].second, pairs[k].first) = rho[k];
  }
  init.sigma = smooth_to_pd(sigma);
  return init;
}

}  // namespace osem
