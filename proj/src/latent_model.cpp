#include "osem/latent_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "osem/errors.hpp"

namespace osem {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Thresholds::Thresholds(std::vector<std::vector<double>> interior_cuts)
    : cuts_(std::move(interior_cuts)) {
  for (std::size_t i = 0; i < cuts_.size(); ++i) {
    const auto& c = cuts_[i];
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (!std::isfinite(c[l])) {
        throw InputError("thresholds: variable " + std::to_string(i) + " has a non-finite cut");
      }
      if (l > 0 && !(c[l] > c[l - 1])) {
        throw InputError("thresholds: variable " + std::to_string(i) +
                         " cuts are not strictly increasing");
      }
    }
  }
}

double Thresholds::lower(std::size_t var, int level) const {
  if (level < 0 || level >= levels(var)) throw InputError("thresholds: level code out of range");
  return level == 0 ? -kInf : cuts_[var][level - 1];
}

double Thresholds::upper(std::size_t var, int level) const {
  if (level < 0 || level >= levels(var)) throw InputError("thresholds: level code out of range");
  return level + 1 == levels(var) ? kInf : cuts_[var][level];
}

ParamSet unit_params(const Dag& dag) {
  ParamSet params(dag.size());
  for (int i = 0; i < dag.size(); ++i) {
    params[i].parents = dag.parents(i);
    params[i].coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag.parents(i).size()));
    params[i].variance = 1.0;
  }
  return params;
}

Eigen::MatrixXd params_to_covariance(const ParamSet& params, const Dag& dag) {
  const int n = dag.size();
  if (static_cast<int>(params.size()) != n) {
    throw StructuralError("params_to_covariance: parameter count does not match the DAG");
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const auto& p = params[i];
    if (p.parents != dag.parents(i) ||
        p.coefficients.size() != static_cast<Eigen::Index>(p.parents.size())) {
      throw StructuralError("params_to_covariance: parameters of node " + std::to_string(i) +
                            " do not match its parent set");
    }
    if (!(p.variance > 0.0)) {
      throw NumericError("params_to_covariance: non-positive variance at node " + std::to_string(i));
    }
    for (std::size_t k = 0; k < p.parents.size(); ++k) b(i, p.parents[k]) = p.coefficients[k];
    v[i] = p.variance;
  }
  const Eigen::MatrixXd i_minus_b = Eigen::MatrixXd::Identity(n, n) - b;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_b);
  if (!lu.isInvertible()) throw StructuralError("params_to_covariance: (I - B) is singular");
  const Eigen::MatrixXd a = lu.inverse();
  Eigen::MatrixXd sigma = a * v.asDiagonal() * a.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

ScaledCorrelation covariance_to_correlation(const Eigen::MatrixXd& covariance) {
  const auto n = covariance.rows();
  if (covariance.cols() != n) throw NumericError("covariance_to_correlation: matrix not square");
  ScaledCorrelation out;
  out.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(covariance(i, i) > 0.0)) {
      throw NumericError("covariance_to_correlation: non-positive diagonal entry at " +
                         std::to_string(i));
    }
    out.scale[i] = std::sqrt(covariance(i, i));
  }
  out.correlation.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.correlation(i, j) =
          i == j ? 1.0 : 0.5 * (covariance(i, j) + covariance(j, i)) / (out.scale[i] * out.scale[j]);
    }
  }
  return out;
}

ParamSet rescale_params(const ParamSet& params, const Eigen::VectorXd& scale) {
  ParamSet out = params;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& p = out[i];
    for (std::size_t k = 0; k < p.parents.size(); ++k) {
      p.coefficients[k] *= scale[p.parents[k]] / scale[i];
    }
    p.variance /= scale[i] * scale[i];
  }
  return out;
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  return llt.info() == Eigen::Success;
}

bool is_correlation_matrix(const Eigen::MatrixXd& m, double tol) {
  if (!is_positive_definite(m)) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m(i, i) - 1.0) > tol) return false;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    }
  }
  return true;
}

double complete_log_density(const Eigen::VectorXd& y, std::span<const int> x,
                            const LatentModel& model) {
  const auto n = model.sigma.rows();
  if (y.size() != n || static_cast<Eigen::Index>(x.size()) != n ||
      static_cast<Eigen::Index>(model.thresholds.size()) != n) {
    throw InputError("complete_log_density: dimension mismatch");
  }
  bool inside = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int level = x[i];
    if (level < 0 || level >= model.thresholds.levels(i)) {
      throw InputError("complete_log_density: level code out of range at variable " +
                       std::to_string(i));
    }
    if (!(y[i] >= model.thresholds.lower(i, level) && y[i] < model.thresholds.upper(i, level))) {
      inside = false;
    }
  }
  if (!inside) return -kInf;
  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
  if (llt.info() != Eigen::Success) throw NumericError("complete_log_density: sigma is not PD");
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

}  // namespace osem
