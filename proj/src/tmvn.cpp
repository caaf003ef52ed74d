#include "osem/tmvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "osem/errors.hpp"
#include "osem/log.hpp"
#include "osem/normal.hpp"
#include "osem/parallel.hpp"

namespace osem {

namespace {

// Keeps y inside [lo, hi) after unstandardizing.
double clamp_half_open(double y, double lo, double hi) {
  if (y < lo) y = lo;
  if (y >= hi) y = std::nextafter(hi, -std::numeric_limits<double>::infinity());
  return std::max(y, lo);
}

double degenerate_point(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo;
  if (std::isfinite(hi)) return std::nextafter(hi, -std::numeric_limits<double>::infinity());
  return 0.0;
}

double truncated_at(double mean, double sd, double lo, double hi, double u) {
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  const auto z = truncated_norm_quantile(a, b, u);
  if (!z) {
    warn("truncated normal interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
         ") has no mass at working precision; using its midpoint");
    return degenerate_point(lo, hi);
  }
  return clamp_half_open(mean + sd * *z, lo, hi);
}

}  // namespace

std::vector<Interval> observation_rectangle(const Thresholds& thresholds, std::span<const int> x) {
  if (x.size() != thresholds.size()) throw InputError("observation_rectangle: dimension mismatch");
  std::vector<Interval> rect(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    rect[i] = {thresholds.lower(i, x[i]), thresholds.upper(i, x[i])};
  }
  return rect;
}

double sample_truncated_univariate(double mean, double sd, double lo, double hi, Rng& rng) {
  if (!(sd > 0.0)) throw NumericError("sample_truncated_univariate: sd must be positive");
  if (!(lo < hi)) throw InputError("sample_truncated_univariate: empty interval");
  return truncated_at(mean, sd, lo, hi, uniform01(rng));
}

GibbsKernel::GibbsKernel(const Eigen::MatrixXd& sigma) {
  const auto n = sigma.rows();
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (sigma.cols() != n || llt.info() != Eigen::Success) {
    throw NumericError("gibbs sampler: sigma is not positive definite");
  }
  const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(n, n));
  weights_.resize(n, n);
  sd_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double omega_ii = precision(i, i);
    sd_[i] = 1.0 / std::sqrt(omega_ii);
    for (Eigen::Index j = 0; j < n; ++j) weights_(i, j) = i == j ? 0.0 : -precision(i, j) / omega_ii;
  }
}

double GibbsKernel::conditional_mean(int i, const Eigen::VectorXd& y) const {
  return weights_.row(i).dot(y);
}

Eigen::MatrixXd gibbs_sample_row(const GibbsKernel& kernel, std::span<const Interval> rect,
                                 const GibbsOptions& options, Rng& rng) {
  const int n = kernel.dim();
  if (static_cast<int>(rect.size()) != n) throw InputError("gibbs_sample_row: rectangle dimension mismatch");
  if (options.draws < 1 || options.burn_in < 0 || options.thin < 1) {
    throw InputError("gibbs_sample_row: draws and thin must be >= 1, burn_in >= 0");
  }
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    if (!(rect[i].lo < rect[i].hi)) throw InputError("gibbs_sample_row: empty rectangle side");
    y[i] = truncated_at(0.0, 1.0, rect[i].lo, rect[i].hi, 0.5);
  }
  Eigen::MatrixXd out(options.draws, n);
  const int sweeps = options.burn_in + options.draws * options.thin;
  int kept = 0;
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      y[i] = truncated_at(kernel.conditional_mean(i, y), kernel.conditional_sd(i), rect[i].lo,
                          rect[i].hi, uniform01(rng));
    }
    if (sweep > options.burn_in && (sweep - options.burn_in) % options.thin == 0) {
      out.row(kept++) = y.transpose();
    }
  }
  return out;
}

Eigen::MatrixXd gibbs_sample_row(const Eigen::MatrixXd& sigma, std::span<const Interval> rect,
                                 const GibbsOptions& options, Rng& rng) {
  return gibbs_sample_row(GibbsKernel(sigma), rect, options, rng);
}

Eigen::MatrixXd expected_covariance(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) throw InputError("expected_covariance: empty sample block");
  Eigen::MatrixXd s = samples.transpose() * samples / static_cast<double>(samples.rows());
  return 0.5 * (s + s.transpose());
}

LatentSampleBlock sample_latent_block(const OrdinalDataset& data, const Thresholds& thresholds,
                                      const Eigen::MatrixXd& sigma, const GibbsOptions& options,
                                      std::uint64_t seed) {
  if (data.cols() != thresholds.size() || static_cast<std::size_t>(sigma.rows()) != data.cols()) {
    throw InputError("sample_latent_block: dimension mismatch");
  }
  const GibbsKernel kernel(sigma);
  LatentSampleBlock block;
  block.observations = data.rows();
  block.draws = options.draws;
  block.seed = seed;
  block.samples.resize(static_cast<Eigen::Index>(data.rows()) * options.draws,
                       static_cast<Eigen::Index>(data.cols()));
  parallel_for(data.rows(), [&](std::size_t j) {
    Rng rng = make_rng(seed, "tmvn-row", j);
    const auto rect = observation_rectangle(thresholds, data.row(j));
    block.samples.middleRows(static_cast<Eigen::Index>(j) * options.draws, options.draws) =
        gibbs_sample_row(kernel, rect, options, rng);
  });
  block.sigma_hat = expected_covariance(block.samples);
  return block;
}

}  // namespace osem
