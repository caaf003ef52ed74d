#include "osem/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace osem {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kLogTiny = -690.0;  // exp(-690) ~ 1e-300

// Gauss-Legendre half-rules (6, 12, 20 points) used by the bivariate CDF.
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384,
                                       0.4679139345726904};
constexpr std::array<double, 3> kX6 = {-0.9324695142031522, -0.6612093864662647,
                                       -0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183,
                                        0.1600783285433464,  0.2031674267230659,
                                        0.2334925365383547,  0.2491470458134029};
constexpr std::array<double, 6> kX12 = {-0.9815606342467191, -0.9041172563704750,
                                        -0.7699026741943050, -0.5873179542866171,
                                        -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 10> kW20 = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
    0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
    0.1491729864726037,  0.1527533871307259};
constexpr std::array<double, 10> kX20 = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
    -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154196,
    -0.2277858511416451, -0.07652652113349733};

// P(X > dh, Y > dk), finite arguments.
double bvn_upper(double dh, double dk, double r) {
  const double* w;
  const double* x;
  int lg;
  if (std::abs(r) < 0.3) {
    w = kW6.data(), x = kX6.data(), lg = 3;
  } else if (std::abs(r) < 0.75) {
    w = kW12.data(), x = kX12.data(), lg = 6;
  } else {
    w = kW20.data(), x = kX20.data(), lg = 10;
  }
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (int i = 0; i < lg; ++i) {
      for (double is : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (is * x[i] + 1.0) / 2.0);
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return bvn * asr / (2.0 * two_pi) + norm_cdf(-h) * norm_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (double is : {-1.0, 1.0}) {
        double xs = a * (is * x[i] + 1.0);
        xs *= xs;
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) {
    if (h < 0.0) {
      bvn += norm_cdf(k) - norm_cdf(h);
    } else {
      bvn += norm_cdf(-h) - norm_cdf(-k);
    }
  }
  return bvn;
}

}  // namespace

double norm_pdf(double x) { return std::exp(norm_log_pdf(x)); }

double norm_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_log_cdf(double x) {
  if (x == -kInf) return -kInf;
  if (x > -30.0) {
    if (x > 5.0) return std::log1p(-norm_cdf(-x));
    return std::log(norm_cdf(x));
  }
  // Mills-ratio asymptotic expansion.
  const double z = 1.0 / (x * x);
  const double series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z)));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double norm_quantile_from_log(double log_p) {
  if (log_p >= 0.0) return kInf;
  if (log_p > kLogTiny) return norm_quantile(std::exp(log_p));
  // Newton on log Phi(x) = log_p from the leading-order tail solution.
  double x = -std::sqrt(-2.0 * log_p);
  for (int iter = 0; iter < 50; ++iter) {
    const double f = norm_log_cdf(x) - log_p;
    const double slope = std::exp(norm_log_pdf(x) - norm_log_cdf(x));
    const double step = f / slope;
    x -= step;
    if (std::abs(step) < 1e-14 * std::abs(x)) break;
  }
  return x;
}

double norm_interval_prob(double a, double b) {
  if (!(a < b)) return 0.0;
  if (a > 0.0) return std::max(0.0, norm_cdf(-a) - norm_cdf(-b));
  return std::max(0.0, norm_cdf(b) - norm_cdf(a));
}

std::optional<double> truncated_norm_quantile(double a, double b, double u) {
  if (!(a < b)) return std::nullopt;
  if (a > 0.0) {
    // Reflect into the lower half where Phi keeps relative precision.
    auto reflected = truncated_norm_quantile(-b, -a, 1.0 - u);
    if (!reflected) return std::nullopt;
    return -*reflected;
  }
  double x;
  if (b < -6.0) {
    const double la = norm_log_cdf(a);
    const double lb = norm_log_cdf(b);
    const double ratio = std::exp(la - lb);
    const double log_p = lb + std::log(ratio + u * (1.0 - ratio));
    if (!std::isfinite(lb) || !std::isfinite(log_p)) return std::nullopt;
    x = norm_quantile_from_log(log_p);
  } else {
    const double pa = norm_cdf(a);
    const double pb = norm_cdf(b);
    if (!(pb > pa)) return std::nullopt;
    x = norm_quantile(pa + u * (pb - pa));
  }
  if (std::isnan(x)) return std::nullopt;
  return std::clamp(x, a, b);
}

double bvn_cdf(double h, double k, double rho) {
  if (std::isnan(h) || std::isnan(k)) return std::numeric_limits<double>::quiet_NaN();
  if (h == -kInf || k == -kInf) return 0.0;
  if (h == kInf) return norm_cdf(k);
  if (k == kInf) return norm_cdf(h);
  if (rho >= 1.0) return norm_cdf(std::min(h, k));
  if (rho <= -1.0) return std::max(0.0, norm_cdf(h) - norm_cdf(-k));
  return std::clamp(bvn_upper(-h, -k, rho), 0.0, 1.0);
}

}  // namespace osem
