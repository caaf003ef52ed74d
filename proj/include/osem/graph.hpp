#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "osem/rng.hpp"

namespace osem {

/// Directed edge from -> to (parent -> child).
struct Edge {
  int from = 0;
  int to = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Unordered node pair, stored with a < b.
using NodePair = std::pair<int, int>;

/// Collider a -> mid <- b with a < b and a, b non-adjacent.
struct VStructure {
  int a = 0;
  int mid = 0;
  int b = 0;
  auto operator<=>(const VStructure&) const = default;
};

/// Directed acyclic graph over nodes 0..n-1 with optional edge weights.
/// Mutators throw StructuralError instead of creating a cycle, a self-loop or a
/// duplicate edge.
class Dag {
 public:
  explicit Dag(int n = 0);
  static Dag from_edges(int n, std::span<const Edge> edges);
  /// Complete DAG following `order` (every earlier node is a parent of every later one).
  static Dag complete(std::span<const int> order);
  static Dag complete(int n);

  int size() const { return n_; }
  bool has_edge(int from, int to) const { return adj_[index(from, to)] != 0; }
  bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }
  /// Sorted ascending.
  const std::vector<int>& parents(int node) const { return parents_[node]; }
  std::vector<int> children(int node) const;
  /// Lexicographically sorted.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edge_count_; }

  /// True if a directed path from -> ... -> to exists (length >= 1).
  bool reaches(int from, int to) const;
  bool would_create_cycle(int from, int to) const { return from == to || reaches(to, from); }

  void add_edge(int from, int to, std::optional<double> weight = std::nullopt);
  void remove_edge(int from, int to);
  void reverse_edge(int from, int to);

  std::optional<double> weight(int from, int to) const;
  void set_weight(int from, int to, double weight);
  /// Every edge carries a weight.
  bool is_weighted() const { return weights_.size() == edge_count_; }

  bool operator==(const Dag& other) const {
    return n_ == other.n_ && adj_ == other.adj_ && weights_ == other.weights_;
  }

 private:
  std::size_t index(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(to);
  }
  void check_node(int node) const;

  int n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<std::vector<int>> parents_;
  std::map<Edge, double> weights_;
  std::size_t edge_count_ = 0;
};

/// Partially directed graph: each adjacency is either directed or undirected.
class Pdag {
 public:
  explicit Pdag(int n = 0);

  int size() const { return n_; }
  bool adjacent(int a, int b) const { return mark(a, b) || mark(b, a); }
  bool is_directed(int from, int to) const { return mark(from, to) && !mark(to, from); }
  bool is_undirected(int a, int b) const { return mark(a, b) && mark(b, a); }

  void add_directed(int from, int to);
  void add_undirected(int a, int b);
  /// Turns an existing undirected adjacency into from -> to.
  void orient(int from, int to);

  std::vector<Edge> directed_edges() const;
  std::vector<NodePair> undirected_edges() const;
  std::vector<NodePair> skeleton() const;
  std::size_t adjacency_count() const;

  bool operator==(const Pdag& other) const { return n_ == other.n_ && marks_ == other.marks_; }

 protected:
  bool mark(int a, int b) const {
    return marks_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)] != 0;
  }

 private:
  void set_mark(int a, int b, bool on);
  void check_pair(int a, int b) const;

  int n_ = 0;
  std::vector<std::uint8_t> marks_;
};

/// Skeleton plus the orientations that belong to v-structures, nothing else.
class Pattern : public Pdag {
 public:
  using Pdag::Pdag;
};

/// Completed partially directed acyclic graph: canonical Markov equivalence class representative.
class Cpdag : public Pdag {
 public:
  using Pdag::Pdag;
};

bool is_acyclic(int n, std::span<const Edge> edges);

/// Kahn's algorithm, smallest available index first. Throws StructuralError on a cycle.
std::vector<int> topological_order(const Dag& dag);
std::vector<int> topological_order(int n, std::span<const Edge> edges);

Pdag as_pdag(const Dag& dag);
std::vector<VStructure> v_structures(const Pdag& graph);
std::vector<VStructure> v_structures(const Dag& dag);

Pattern dag_to_pattern(const Dag& dag);
/// Keeps only directed edges that participate in a v-structure of `graph`.
Pattern to_pattern(const Pdag& graph);
/// Orients v-structures, then closes under Meek's rules R1-R3.
Cpdag dag_to_cpdag(const Dag& dag);
bool markov_equivalent(const Dag& d1, const Dag& d2);

struct WeightRange {
  double low = 0.4;
  double high = 1.0;
};

/// Ordered-pair Erdos-Renyi DAG: a uniformly random node order, each forward
/// pair included with probability d / (n - 1); weights uniform on
/// (-high, -low) U (low, high) with a fair-coin sign.
Dag random_dag(int n, double expected_neighbors, Rng& rng, WeightRange weights = {});

/// Calls visit(parent_masks) for every DAG on n <= 6 nodes, where
/// parent_masks[i] is the bitmask of node i's parents.
void for_each_dag(int n, const std::function<void(std::span<const std::uint32_t>)>& visit);
Dag dag_from_masks(std::span<const std::uint32_t> parent_masks);
std::vector<Dag> enumerate_dags(int n);

}  // namespace osem
