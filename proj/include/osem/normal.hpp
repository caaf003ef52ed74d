#pragma once

#include <optional>

namespace osem {

double norm_pdf(double x);
double norm_log_pdf(double x);
double norm_cdf(double x);
/// log Phi(x), accurate far into the lower tail (asymptotic series below -30).
double norm_log_cdf(double x);
/// Phi^{-1}(p); returns -inf / +inf at p = 0 / 1.
double norm_quantile(double p);
/// Phi^{-1}(exp(log_p)) without underflow for very negative log_p.
double norm_quantile_from_log(double log_p);

/// P(a <= Z < b) for a standard normal Z, computed in the tail where it is accurate.
double norm_interval_prob(double a, double b);

/// Inverse CDF of the standard normal truncated to [a, b) at level u in [0, 1).
/// Works in log-CDF space when the interval lies beyond six standard deviations.
/// Returns nullopt when the interval carries no mass at working precision.
std::optional<double> truncated_norm_quantile(double a, double b, double u);

/// Standard bivariate normal CDF P(Z1 < h, Z2 < k) with correlation rho (|rho| <= 1).
/// Genz's adaptation of the Drezner-Wesolowsky method; absolute error ~1e-15.
double bvn_cdf(double h, double k, double rho);

}  // namespace osem
