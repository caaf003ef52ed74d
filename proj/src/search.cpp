#include "osem/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "osem/errors.hpp"

namespace osem {

ScoredDag::ScoredDag(const ScoreContext& context, Dag dag)
    : context_(&context), dag_(std::move(dag)), node_scores_(dag_.size()) {
  if (dag_.size() != context.size()) throw InputError("search: DAG size does not match the context");
  for (int i = 0; i < dag_.size(); ++i) node_scores_[i] = context.node_score(i, dag_.parents(i));
}

std::vector<int> ScoredDag::parents_with(int node, int extra) const {
  auto pa = dag_.parents(node);
  pa.insert(std::lower_bound(pa.begin(), pa.end(), extra), extra);
  return pa;
}

std::vector<int> ScoredDag::parents_without(int node, int removed) const {
  auto pa = dag_.parents(node);
  pa.erase(std::remove(pa.begin(), pa.end(), removed), pa.end());
  return pa;
}

bool ScoredDag::is_legal(const Move& move, std::optional<int> max_parents) const {
  const int n = dag_.size();
  if (move.from < 0 || move.to < 0 || move.from >= n || move.to >= n || move.from == move.to) {
    return false;
  }
  switch (move.kind) {
    case MoveKind::add:
      if (dag_.adjacent(move.from, move.to)) return false;
      if (max_parents && static_cast<int>(dag_.parents(move.to).size()) >= *max_parents) return false;
      return !dag_.reaches(move.to, move.from);
    case MoveKind::remove:
      return dag_.has_edge(move.from, move.to);
    case MoveKind::reverse: {
      if (!dag_.has_edge(move.from, move.to)) return false;
      if (max_parents && static_cast<int>(dag_.parents(move.from).size()) >= *max_parents) return false;
      // Reversal closes a cycle iff another path from -> ... -> to exists.
      Dag without = dag_;
      without.remove_edge(move.from, move.to);
      return !without.reaches(move.from, move.to);
    }
  }
  return false;
}

double ScoredDag::delta(const Move& move) const {
  switch (move.kind) {
    case MoveKind::add:
      return context_->node_score(move.to, parents_with(move.to, move.from)) - node_scores_[move.to];
    case MoveKind::remove:
      return context_->node_score(move.to, parents_without(move.to, move.from)) -
             node_scores_[move.to];
    case MoveKind::reverse:
      return context_->node_score(move.to, parents_without(move.to, move.from)) -
             node_scores_[move.to] +
             context_->node_score(move.from, parents_with(move.from, move.to)) -
             node_scores_[move.from];
  }
  return 0.0;
}

void ScoredDag::apply(const Move& move) {
  switch (move.kind) {
    case MoveKind::add:
      dag_.add_edge(move.from, move.to);
      break;
    case MoveKind::remove:
      dag_.remove_edge(move.from, move.to);
      break;
    case MoveKind::reverse:
      dag_.reverse_edge(move.from, move.to);
      node_scores_[move.from] = context_->node_score(move.from, dag_.parents(move.from));
      break;
  }
  node_scores_[move.to] = context_->node_score(move.to, dag_.parents(move.to));
}

double ScoredDag::total() const {
  return std::accumulate(node_scores_.begin(), node_scores_.end(), 0.0);
}

namespace {

// Improvements smaller than this are treated as ties so that the climb cannot
// cycle on floating-point noise between score-equivalent neighbours.
constexpr double kMinImprovement = 1e-9;

}  // namespace

SearchResult hill_climb(const ScoreContext& context, const Dag& init, std::optional<int> max_parents) {
  ScoredDag state(context, init);
  const int n = init.size();
  SearchResult result{init, state.total(), {state.total()}};
  // Move deltas depend only on the parent sets of the endpoints, so they are
  // cached and dropped for nodes whose parents changed.
  constexpr MoveKind kinds[] = {MoveKind::add, MoveKind::remove, MoveKind::reverse};
  const auto slot = [n](int from, int to, int k) { return (static_cast<std::size_t>(from) * n + to) * 3 + k; };
  std::vector<double> cached(static_cast<std::size_t>(n) * n * 3);
  std::vector<char> fresh(cached.size(), 0);
  const Dag& dag = state.dag();
  while (true) {
    std::optional<Move> best;
    double best_delta = kMinImprovement;
    for (int from = 0; from < n; ++from) {
      for (int to = 0; to < n; ++to) {
        if (from == to) continue;
        const bool edge = dag.has_edge(from, to);
        const bool adjacent = edge || dag.has_edge(to, from);
        for (int k = 0; k < 3; ++k) {
          const Move move{kinds[k], from, to};
          if (move.kind == MoveKind::add ? adjacent : !edge) continue;
          const std::size_t s = slot(from, to, k);
          if (!fresh[s]) {
            cached[s] = state.delta(move);
            fresh[s] = 1;
          }
          if (cached[s] > best_delta && state.is_legal(move, max_parents)) {
            best_delta = cached[s];
            best = move;
          }
        }
      }
    }
    if (!best) break;
    state.apply(*best);
    result.trajectory.push_back(state.total());
    std::vector<int> changed{best->to};
    if (best->kind == MoveKind::reverse) changed.push_back(best->from);
    for (int c : changed) {
      for (int other = 0; other < n; ++other) {
        for (int k = 0; k < 3; ++k) fresh[slot(other, c, k)] = 0;
        fresh[slot(c, other, 2)] = 0;
      }
    }
  }
  result.dag = state.dag();
  result.score = state.total();
  return result;
}

SearchResult search_structure(const ScoreContext& context, const Dag& init, const SearchConfig& config) {
  SearchResult best = hill_climb(context, init, config.max_parents);
  const int n = init.size();
  if (n < 2) return best;
  Rng rng = make_rng(config.seed, "search-restart");
  // Restart graphs: about two neighbours per node, capped at a complete graph.
  const double density = std::min<double>(2.0, n - 1);
  for (int r = 0; r < config.restarts; ++r) {
    Dag start = random_dag(n, density, rng);
    Dag unweighted(n);
    for (const auto& e : start.edges()) {
      if (!config.max_parents || static_cast<int>(unweighted.parents(e.to).size()) < *config.max_parents) {
        unweighted.add_edge(e.from, e.to);
      }
    }
    SearchResult candidate = hill_climb(context, unweighted, config.max_parents);
    if (candidate.score > best.score + kMinImprovement) best = std::move(candidate);
  }
  return best;
}

SearchResult exhaustive_search(const ScoreContext& context, int n) {
  if (n > 6) throw InputError("exhaustive_search: n must be <= 6");
  if (n != context.size()) throw InputError("exhaustive_search: n does not match the context");
  // Local score for every (node, parent mask).
  const std::uint32_t subsets = n == 0 ? 1u : (1u << n);
  std::vector<std::vector<double>> local(n, std::vector<double>(subsets, 0.0));
  for (int i = 0; i < n; ++i) {
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
      if (mask >> i & 1u) continue;
      std::vector<int> parents;
      for (int j = 0; j < n; ++j) {
        if (mask >> j & 1u) parents.push_back(j);
      }
      local[i][mask] = context.node_score(i, parents);
    }
  }
  std::vector<std::uint32_t> best_masks(n, 0);
  std::vector<Edge> best_edges;
  double best_score = -std::numeric_limits<double>::infinity();
  auto edges_of = [n](std::span<const std::uint32_t> masks) {
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (masks[b] >> a & 1u) edges.push_back({a, b});
      }
    }
    return edges;
  };
  for_each_dag(n, [&](std::span<const std::uint32_t> masks) {
    double score = 0.0;
    for (int i = 0; i < n; ++i) score += local[i][masks[i]];
    const double tol = std::isfinite(best_score) ? 1e-9 * std::max(1.0, std::abs(best_score)) : 0.0;
    if (score > best_score + tol) {
      best_score = score;
      best_masks.assign(masks.begin(), masks.end());
      best_edges = edges_of(masks);
    } else if (score >= best_score - tol) {
      auto edges = edges_of(masks);
      if (edges < best_edges) {
        best_score = std::max(best_score, score);
        best_masks.assign(masks.begin(), masks.end());
        best_edges = std::move(edges);
      }
    }
  });
  Dag dag = dag_from_masks(best_masks);
  const double score = context.total_score(dag);
  return {dag, score, {score}};
}

}  // namespace osem
