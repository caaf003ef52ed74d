#include "osem/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "osem/errors.hpp"

namespace osem {

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(int n) : n_(n) {
  if (n < 0) throw StructuralError("graph: negative node count");
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
  parents_.resize(n);
}

Dag Dag::from_edges(int n, std::span<const Edge> edges) {
  Dag dag(n);
  for (const auto& e : edges) dag.add_edge(e.from, e.to);
  return dag;
}

Dag Dag::complete(std::span<const int> order) {
  Dag dag(static_cast<int>(order.size()));
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) dag.add_edge(order[a], order[b]);
  }
  return dag;
}

Dag Dag::complete(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return complete(order);
}

void Dag::check_node(int node) const {
  if (node < 0 || node >= n_) {
    throw StructuralError("graph: node " + std::to_string(node) + " outside [0, " +
                          std::to_string(n_) + ")");
  }
}

std::vector<int> Dag::children(int node) const {
  std::vector<int> out;
  for (int c = 0; c < n_; ++c) {
    if (has_edge(node, c)) out.push_back(c);
  }
  return out;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (has_edge(a, b)) out.push_back({a, b});
    }
  }
  return out;
}

bool Dag::reaches(int from, int to) const {
  std::vector<std::uint8_t> seen(n_, 0);
  std::vector<int> stack{from};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n_; ++v) {
      if (!has_edge(u, v) || seen[v]) continue;
      if (v == to) return true;
      seen[v] = 1;
      stack.push_back(v);
    }
  }
  return false;
}

void Dag::add_edge(int from, int to, std::optional<double> weight) {
  check_node(from);
  check_node(to);
  if (from == to) throw StructuralError("graph: self-loop at node " + std::to_string(from));
  if (has_edge(from, to)) {
    throw StructuralError("graph: duplicate edge " + std::to_string(from) + "->" + std::to_string(to));
  }
  if (has_edge(to, from) || reaches(to, from)) {
    throw StructuralError("graph: edge " + std::to_string(from) + "->" + std::to_string(to) +
                          " would create a cycle");
  }
  adj_[index(from, to)] = 1;
  auto& pa = parents_[to];
  pa.insert(std::lower_bound(pa.begin(), pa.end(), from), from);
  ++edge_count_;
  if (weight) weights_[{from, to}] = *weight;
}

void Dag::remove_edge(int from, int to) {
  check_node(from);
  check_node(to);
  if (!has_edge(from, to)) {
    throw StructuralError("graph: no edge " + std::to_string(from) + "->" + std::to_string(to));
  }
  adj_[index(from, to)] = 0;
  auto& pa = parents_[to];
  pa.erase(std::lower_bound(pa.begin(), pa.end(), from));
  --edge_count_;
  weights_.erase({from, to});
}

void Dag::reverse_edge(int from, int to) {
  remove_edge(from, to);
  try {
    add_edge(to, from);
  } catch (const StructuralError&) {
    add_edge(from, to);
    throw;
  }
}

std::optional<double> Dag::weight(int from, int to) const {
  auto it = weights_.find({from, to});
  if (it == weights_.end()) return std::nullopt;
  return it->second;
}

void Dag::set_weight(int from, int to, double weight) {
  if (!has_edge(from, to)) {
    throw StructuralError("graph: weight for missing edge " + std::to_string(from) + "->" +
                          std::to_string(to));
  }
  weights_[{from, to}] = weight;
}

// ---------------------------------------------------------------------------
// Pdag

Pdag::Pdag(int n) : n_(n) {
  if (n < 0) throw StructuralError("graph: negative node count");
  marks_.assign(static_cast<std::size_t>(n) * n, 0);
}

void Pdag::check_pair(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_ || b >= n_ || a == b) {
    throw StructuralError("graph: invalid node pair (" + std::to_string(a) + ", " +
                          std::to_string(b) + ")");
  }
}

void Pdag::set_mark(int a, int b, bool on) {
  marks_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)] = on ? 1 : 0;
}

void Pdag::add_directed(int from, int to) {
  check_pair(from, to);
  if (adjacent(from, to)) throw StructuralError("graph: duplicate adjacency");
  set_mark(from, to, true);
}

void Pdag::add_undirected(int a, int b) {
  check_pair(a, b);
  if (adjacent(a, b)) throw StructuralError("graph: duplicate adjacency");
  set_mark(a, b, true);
  set_mark(b, a, true);
}

void Pdag::orient(int from, int to) {
  check_pair(from, to);
  if (!is_undirected(from, to)) throw StructuralError("graph: orient() needs an undirected edge");
  set_mark(to, from, false);
}

std::vector<Edge> Pdag::directed_edges() const {
  std::vector<Edge> out;
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a != b && is_directed(a, b)) out.push_back({a, b});
    }
  }
  return out;
}

std::vector<NodePair> Pdag::undirected_edges() const {
  std::vector<NodePair> out;
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      if (is_undirected(a, b)) out.emplace_back(a, b);
    }
  }
  return out;
}

std::vector<NodePair> Pdag::skeleton() const {
  std::vector<NodePair> out;
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      if (adjacent(a, b)) out.emplace_back(a, b);
    }
  }
  return out;
}

std::size_t Pdag::adjacency_count() const { return skeleton().size(); }

// ---------------------------------------------------------------------------
// Free functions

std::vector<int> topological_order(int n, std::span<const Edge> edges) {
  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : edges) {
    if (e.from < 0 || e.to < 0 || e.from >= n || e.to >= n) {
      throw StructuralError("graph: edge endpoint outside [0, n)");
    }
    children[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int c : children[u]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(order.size()) != n) throw StructuralError("graph: cycle detected");
  return order;
}

std::vector<int> topological_order(const Dag& dag) {
  const auto edges = dag.edges();
  return topological_order(dag.size(), edges);
}

bool is_acyclic(int n, std::span<const Edge> edges) {
  for (const auto& e : edges) {
    if (e.from == e.to) return false;
  }
  try {
    topological_order(n, edges);
    return true;
  } catch (const StructuralError&) {
    return false;
  }
}

Pdag as_pdag(const Dag& dag) {
  Pdag g(dag.size());
  for (const auto& e : dag.edges()) g.add_directed(e.from, e.to);
  return g;
}

std::vector<VStructure> v_structures(const Pdag& graph) {
  std::vector<VStructure> out;
  const int n = graph.size();
  for (int mid = 0; mid < n; ++mid) {
    for (int a = 0; a < n; ++a) {
      if (a == mid || !graph.is_directed(a, mid)) continue;
      for (int b = a + 1; b < n; ++b) {
        if (b == mid || !graph.is_directed(b, mid) || graph.adjacent(a, b)) continue;
        out.push_back({a, mid, b});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VStructure> v_structures(const Dag& dag) { return v_structures(as_pdag(dag)); }

Pattern to_pattern(const Pdag& graph) {
  const int n = graph.size();
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(n) * n, 0);
  for (const auto& v : v_structures(graph)) {
    keep[static_cast<std::size_t>(v.a) * n + v.mid] = 1;
    keep[static_cast<std::size_t>(v.b) * n + v.mid] = 1;
  }
  Pattern pattern(n);
  for (const auto& [a, b] : graph.skeleton()) {
    if (keep[static_cast<std::size_t>(a) * n + b]) {
      pattern.add_directed(a, b);
    } else if (keep[static_cast<std::size_t>(b) * n + a]) {
      pattern.add_directed(b, a);
    } else {
      pattern.add_undirected(a, b);
    }
  }
  return pattern;
}

Pattern dag_to_pattern(const Dag& dag) { return to_pattern(as_pdag(dag)); }

namespace {

// One sweep of Meek's rules R1-R3; returns true if anything was oriented.
// R4 is not needed when starting from a pattern without background knowledge.
bool apply_meek_rules(Pdag& g) {
  const int n = g.size();
  bool changed = false;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b || !g.is_undirected(a, b)) continue;
      bool orient = false;
      for (int c = 0; c < n && !orient; ++c) {
        if (c == a || c == b) continue;
        // R1: c -> a - b, c and b non-adjacent.
        if (g.is_directed(c, a) && !g.adjacent(c, b)) orient = true;
        // R2: a -> c -> b with a - b.
        if (g.is_directed(a, c) && g.is_directed(c, b)) orient = true;
      }
      // R3: a - c -> b, a - d -> b, c and d non-adjacent.
      for (int c = 0; c < n && !orient; ++c) {
        if (c == a || c == b || !g.is_undirected(a, c) || !g.is_directed(c, b)) continue;
        for (int d = c + 1; d < n && !orient; ++d) {
          if (d == a || d == b || !g.is_undirected(a, d) || !g.is_directed(d, b)) continue;
          if (!g.adjacent(c, d)) orient = true;
        }
      }
      if (orient) {
        g.orient(a, b);
        changed = true;
      }
    }
  }
  return changed;
}

}  // namespace

Cpdag dag_to_cpdag(const Dag& dag) {
  Pattern pattern = dag_to_pattern(dag);
  Pdag g = pattern;
  while (apply_meek_rules(g)) {
  }
  Cpdag cpdag(g.size());
  static_cast<Pdag&>(cpdag) = g;
  return cpdag;
}

bool markov_equivalent(const Dag& d1, const Dag& d2) {
  if (d1.size() != d2.size()) return false;
  return as_pdag(d1).skeleton() == as_pdag(d2).skeleton() && v_structures(d1) == v_structures(d2);
}

Dag random_dag(int n, double expected_neighbors, Rng& rng, WeightRange weights) {
  if (n < 2 || !(expected_neighbors > 0.0) || expected_neighbors > n - 1) {
    throw InputError("random_dag: expected neighbours must lie in (0, n-1] with n >= 2");
  }
  if (!(weights.low >= 0.0 && weights.low < weights.high)) {
    throw InputError("random_dag: invalid weight range");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const double p = expected_neighbors / (n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(weights.low, weights.high);
  Dag dag(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (unit(rng) >= p) continue;
      double w = magnitude(rng);
      // The open interval excludes the lower endpoint.
      while (w <= weights.low) w = magnitude(rng);
      if (unit(rng) < 0.5) w = -w;
      dag.add_edge(order[a], order[b], w);
    }
  }
  return dag;
}

void for_each_dag(int n, const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (n < 0 || n > 6) throw InputError("for_each_dag: n must lie in [0, 6]");
  std::vector<NodePair> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  std::vector<std::uint32_t> masks(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::fill(masks.begin(), masks.end(), 0u);
    std::size_t rest = code;
    for (const auto& [a, b] : pairs) {
      const std::size_t state = rest % 3;
      rest /= 3;
      if (state == 1) masks[b] |= 1u << a;
      if (state == 2) masks[a] |= 1u << b;
    }
    // Peel parentless nodes until nothing is left (acyclic) or stuck (cycle).
    std::uint32_t remaining = n == 0 ? 0u : ((1u << n) - 1u);
    bool progress = true;
    while (remaining && progress) {
      progress = false;
      for (int i = 0; i < n; ++i) {
        if ((remaining >> i & 1u) && (masks[i] & remaining) == 0) {
          remaining &= ~(1u << i);
          progress = true;
        }
      }
    }
    if (remaining == 0) visit(masks);
  }
}

Dag dag_from_masks(std::span<const std::uint32_t> parent_masks) {
  const int n = static_cast<int>(parent_masks.size());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (parent_masks[i] >> j & 1u) edges.push_back({j, i});
    }
  }
  return Dag::from_edges(n, edges);
}

std::vector<Dag> enumerate_dags(int n) {
  std::vector<Dag> out;
  for_each_dag(n, [&](std::span<const std::uint32_t> masks) { out.push_back(dag_from_masks(masks)); });
  return out;
}

}  // namespace osem
