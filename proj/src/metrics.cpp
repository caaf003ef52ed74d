#include "osem/metrics.hpp"

#include <algorithm>
#include <iterator>

#include "osem/errors.hpp"

namespace osem {

namespace {

void require_same_size(const Pdag& a, const Pdag& b) {
  if (a.size() != b.size()) throw InputError("metrics: graphs have different node counts");
}

}  // namespace

Confusion pattern_confusion(const Pdag& estimated_graph, const Pdag& truth_graph, bool skeleton_only) {
  require_same_size(estimated_graph, truth_graph);
  const Pattern estimated = to_pattern(estimated_graph);
  const Pattern truth = to_pattern(truth_graph);
  Confusion c;
  c.positives = static_cast<int>(truth.adjacency_count());
  const auto skeleton = estimated.skeleton();
  for (const auto& [a, b] : skeleton) {
    if (!truth.adjacent(a, b)) continue;
    if (skeleton_only) {
      c.tp += 1.0;
      continue;
    }
    const bool est_undirected = estimated.is_undirected(a, b);
    const bool true_undirected = truth.is_undirected(a, b);
    if (est_undirected && true_undirected) {
      c.tp += 1.0;
    } else if (est_undirected != true_undirected) {
      c.tp += 0.5;
    } else if (estimated.is_directed(a, b) == truth.is_directed(a, b)) {
      c.tp += 1.0;
    }
  }
  c.fp = static_cast<double>(skeleton.size()) - c.tp;
  return c;
}

Rates tpr_fprp(double tp, double fp, int positives) {
  if (positives < 1) throw InputError("tpr_fprp: the true graph has no edges");
  return {tp / positives, fp / positives};
}

Rates tpr_fprp(const Confusion& c) { return tpr_fprp(c.tp, c.fp, c.positives); }

int shd_pattern(const Pdag& estimated, const Pdag& truth) {
  require_same_size(estimated, truth);
  const auto s1 = estimated.skeleton();
  const auto s2 = truth.skeleton();
  // v_structures() ignores undirected edges, so a CPDAG yields the same set as its pattern.
  std::vector<NodePair> skeleton_diff;
  std::set_symmetric_difference(s1.begin(), s1.end(), s2.begin(), s2.end(),
                                std::back_inserter(skeleton_diff));
  auto v1 = v_structures(estimated);
  auto v2 = v_structures(truth);
  std::sort(v1.begin(), v1.end());
  std::sort(v2.begin(), v2.end());
  std::vector<VStructure> v_diff;
  std::set_symmetric_difference(v1.begin(), v1.end(), v2.begin(), v2.end(), std::back_inserter(v_diff));
  return static_cast<int>(skeleton_diff.size() + v_diff.size());
}

}  // namespace osem
