#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "osem/graph.hpp"
#include "osem/scoring.hpp"

namespace osem {

enum class MoveKind { add, remove, reverse };

/// Single-edge move on the edge from -> to (for reverse: the existing edge).
struct Move {
  MoveKind kind;
  int from;
  int to;
};

/// A DAG together with its per-node local scores under one ScoreContext.
/// Applying a move rescores only the nodes whose parent sets change.
class ScoredDag {
 public:
  ScoredDag(const ScoreContext& context, Dag dag);

  /// Keeps the DAG acyclic and respects the optional in-degree bound.
  bool is_legal(const Move& move, std::optional<int> max_parents = std::nullopt) const;
  /// Score change the move would cause. Requires is_legal(move).
  double delta(const Move& move) const;
  void apply(const Move& move);

  const Dag& dag() const { return dag_; }
  const std::vector<double>& node_scores() const { return node_scores_; }
  /// Sum of node scores in node order.
  double total() const;

 private:
  std::vector<int> parents_with(int node, int extra) const;
  std::vector<int> parents_without(int node, int removed) const;

  const ScoreContext* context_;
  Dag dag_;
  std::vector<double> node_scores_;
};

struct SearchConfig {
  int restarts = 0;
  std::optional<int> max_parents;
  std::uint64_t seed = 0;
};

struct SearchResult {
  Dag dag;
  double score = 0.0;
  /// Scores after each accepted move of the winning climb, starting with its initial score.
  std::vector<double> trajectory;
};

/// Greedy hill-climbing from `init` over add / remove / reverse moves, taking
/// the best strictly improving move each step (ties broken by enumeration
/// order over (from, to)). Returns the local optimum.
SearchResult hill_climb(const ScoreContext& context, const Dag& init,
                        std::optional<int> max_parents = std::nullopt);

/// hill_climb from `init`, then from config.restarts random DAGs; the best
/// local optimum wins (earlier climbs win ties).
SearchResult search_structure(const ScoreContext& context, const Dag& init,
                              const SearchConfig& config = {});

/// Scores every DAG on n <= 6 nodes. Scores within 1e-9 (relative) of each
/// other count as tied; ties go to the lexicographically smallest edge list.
SearchResult exhaustive_search(const ScoreContext& context, int n);

}  // namespace osem
