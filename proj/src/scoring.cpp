#include "osem/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "osem/errors.hpp"

namespace osem {

namespace {
constexpr double kMinConditionalVariance = 1e-12;
}

ScoreContext::ScoreContext(Eigen::MatrixXd sigma_hat, double sample_count, double penalty)
    : sigma_hat_(std::move(sigma_hat)), sample_count_(sample_count), penalty_(penalty) {
  if (sigma_hat_.rows() != sigma_hat_.cols()) throw InputError("score context: matrix not square");
  if (!(sample_count_ >= 1.0)) throw InputError("score context: sample count must be >= 1");
  if (!(penalty_ >= 0.0)) throw InputError("score context: penalty must be >= 0");
  sigma_hat_ = 0.5 * (sigma_hat_ + sigma_hat_.transpose()).eval();
}

std::size_t ScoreContext::KeyHash::operator()(const std::vector<int>& key) const noexcept {
  std::size_t h = key.size();
  for (int v : key) h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

double ScoreContext::evaluate(int node, std::span<const int> parents) const {
  const int n = size();
  if (node < 0 || node >= n) throw InputError("node_score: node out of range");
  for (int p : parents) {
    if (p == node || p < 0 || p >= n) {
      throw InputError("node_score: invalid parent " + std::to_string(p) + " of node " +
                       std::to_string(node));
    }
  }
  double conditional = sigma_hat_(node, node);
  if (!parents.empty()) {
    const auto k = static_cast<Eigen::Index>(parents.size());
    Eigen::MatrixXd block(k, k);
    Eigen::VectorXd cross(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      cross[a] = sigma_hat_(parents[a], node);
      for (Eigen::Index b = 0; b < k; ++b) block(a, b) = sigma_hat_(parents[a], parents[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) {
      throw NumericError("node_score: parent block of node " + std::to_string(node) +
                         " is not positive definite");
    }
    conditional -= cross.dot(llt.solve(cross));
  }
  if (!(conditional > kMinConditionalVariance)) {
    throw NumericError("node_score: conditional variance of node " + std::to_string(node) +
                       " is not positive (" + std::to_string(conditional) + ")");
  }
  const double log_n = std::log(sample_count_);
  return -0.5 * sample_count_ * std::log(conditional) -
         penalty_ * 0.5 * log_n * static_cast<double>(parents.size() + 1);
}

double ScoreContext::node_score(int node, std::span<const int> parents) const {
  std::vector<int> key;
  key.reserve(parents.size() + 1);
  key.push_back(node);
  key.insert(key.end(), parents.begin(), parents.end());
  std::sort(key.begin() + 1, key.end());
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double value = evaluate(node, std::span<const int>(key).subspan(1));
  std::unique_lock lock(mutex_);
  return cache_.emplace(std::move(key), value).first->second;
}

double ScoreContext::total_score(const Dag& dag) const {
  if (dag.size() != size()) throw InputError("total_score: DAG size does not match the context");
  double total = 0.0;
  for (int i = 0; i < dag.size(); ++i) total += node_score(i, dag.parents(i));
  return total;
}

std::size_t ScoreContext::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace osem
