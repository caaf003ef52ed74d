#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "osem/errors.hpp"
#include "osem/graph.hpp"

using namespace osem;

namespace {

Dag dag_of(int n, std::initializer_list<Edge> edges) {
  const std::vector<Edge> v(edges);
  return Dag::from_edges(n, v);
}

// d-separation of a and b given z by moralizing the ancestral subgraph of {a, b} U z.
bool d_separated(const Dag& g, int a, int b, unsigned z) {
  const int n = g.size();
  std::vector<bool> keep(n, false);
  std::vector<int> stack = {a, b};
  for (int v = 0; v < n; ++v) {
    if (z >> v & 1u) stack.push_back(v);
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (keep[v]) continue;
    keep[v] = true;
    for (int p : g.parents(v)) stack.push_back(p);
  }
  std::vector<std::vector<bool>> link(n, std::vector<bool>(n, false));
  for (int v = 0; v < n; ++v) {
    if (!keep[v]) continue;
    const auto& pa = g.parents(v);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      link[pa[i]][v] = link[v][pa[i]] = true;
      for (std::size_t j = i + 1; j < pa.size(); ++j) link[pa[i]][pa[j]] = link[pa[j]][pa[i]] = true;
    }
  }
  std::vector<bool> seen(n, false);
  stack = {a};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == b) return false;
    if (seen[v]) continue;
    seen[v] = true;
    for (int w = 0; w < n; ++w) {
      if (link[v][w] && keep[w] && !(z >> w & 1u) && !seen[w]) stack.push_back(w);
    }
  }
  return true;
}

std::vector<bool> independence_model(const Dag& g) {
  std::vector<bool> out;
  const int n = g.size();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      for (unsigned z = 0; z < (1u << n); ++z) {
        if (z >> a & 1u || z >> b & 1u) continue;
        out.push_back(d_separated(g, a, b, z));
      }
    }
  }
  return out;
}

}  // namespace

TEST(Graph, IsAcyclicExamples) {
  EXPECT_TRUE(is_acyclic(3, std::vector<Edge>{}));
  EXPECT_FALSE(is_acyclic(3, std::vector<Edge>{{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_TRUE(is_acyclic(3, std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_FALSE(is_acyclic(2, std::vector<Edge>{{1, 1}}));
}

TEST(Graph, TopologicalOrderExamples) {
  EXPECT_EQ(topological_order(dag_of(3, {{0, 1}, {1, 2}})), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(topological_order(Dag(2)), (std::vector<int>{0, 1}));
  EXPECT_EQ(topological_order(dag_of(3, {{2, 0}, {2, 1}})).front(), 2);
  EXPECT_THROW(topological_order(3, std::vector<Edge>{{0, 1}, {1, 0}}), StructuralError);
}

TEST(Graph, MutatorsRejectInvalidEdges) {
  Dag g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  EXPECT_THROW(g.add_edge(2, 0), StructuralError);
  EXPECT_THROW(g.add_edge(1, 1), StructuralError);
  EXPECT_THROW(g.add_edge(0, 1), StructuralError);
  EXPECT_THROW(g.remove_edge(2, 1), StructuralError);
  EXPECT_THROW(g.add_edge(0, 5), StructuralError);
  Dag h = dag_of(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_THROW(h.reverse_edge(0, 2), StructuralError);
  h.reverse_edge(0, 1);
  EXPECT_TRUE(h.has_edge(1, 0));
  EXPECT_EQ(h.edge_count(), 3u);
}

TEST(Graph, ParentsSortedAndWeights) {
  Dag g(4);
  g.add_edge(3, 1, 0.5);
  g.add_edge(0, 1, -0.7);
  EXPECT_EQ(g.parents(1), (std::vector<int>{0, 3}));
  EXPECT_EQ(*g.weight(3, 1), 0.5);
  EXPECT_TRUE(g.is_weighted());
  g.add_edge(2, 3);
  EXPECT_FALSE(g.is_weighted());
  EXPECT_FALSE(g.weight(2, 3).has_value());
  g.remove_edge(0, 1);
  EXPECT_FALSE(g.weight(0, 1).has_value());
}

TEST(Graph, PatternExamples) {
  const auto collider = dag_to_pattern(dag_of(3, {{0, 2}, {1, 2}}));
  EXPECT_EQ(collider.skeleton().size(), 2u);
  EXPECT_TRUE(collider.is_directed(0, 2));
  EXPECT_TRUE(collider.is_directed(1, 2));

  const auto chain = dag_to_pattern(dag_of(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(chain.skeleton().size(), 2u);
  EXPECT_TRUE(chain.directed_edges().empty());

  const auto shielded = dag_to_pattern(dag_of(3, {{0, 2}, {1, 2}, {0, 1}}));
  EXPECT_EQ(shielded.skeleton().size(), 3u);
  EXPECT_TRUE(shielded.directed_edges().empty());
}

TEST(Graph, CpdagExamples) {
  const auto single = dag_to_cpdag(dag_of(2, {{0, 1}}));
  EXPECT_TRUE(single.is_undirected(0, 1));

  const auto collider = dag_to_cpdag(dag_of(3, {{0, 2}, {1, 2}}));
  EXPECT_TRUE(collider.is_directed(0, 2));
  EXPECT_TRUE(collider.is_directed(1, 2));

  const auto chain = dag_to_cpdag(dag_of(3, {{0, 1}, {1, 2}}));
  EXPECT_TRUE(chain.is_undirected(0, 1));
  EXPECT_TRUE(chain.is_undirected(1, 2));

  // Meek R1: a -> c <- b plus c - d orients c -> d.
  const auto r1 = dag_to_cpdag(dag_of(4, {{0, 2}, {1, 2}, {2, 3}}));
  EXPECT_TRUE(r1.is_directed(2, 3));
}

TEST(Graph, MarkovEquivalenceExamples) {
  EXPECT_TRUE(markov_equivalent(dag_of(2, {{0, 1}}), dag_of(2, {{1, 0}})));
  EXPECT_FALSE(markov_equivalent(dag_of(3, {{0, 2}, {1, 2}}), dag_of(3, {{2, 0}, {1, 2}})));
  const auto d = dag_of(4, {{0, 1}, {2, 1}, {1, 3}});
  EXPECT_TRUE(markov_equivalent(d, d));
}

TEST(Graph, EnumerationCounts) {
  const std::size_t expected[] = {1, 1, 3, 25, 543, 29281};
  for (int n = 0; n <= 5; ++n) {
    std::size_t count = 0;
    for_each_dag(n, [&](std::span<const std::uint32_t>) { ++count; });
    EXPECT_EQ(count, expected[n]) << n;
  }
  EXPECT_THROW(for_each_dag(7, [](std::span<const std::uint32_t>) {}), InputError);
}

// Exhaustive check against d-separation: DAGs with the same independence model
// must share pattern and CPDAG, and every CPDAG edge is directed exactly when
// all members of the class agree on its orientation.
TEST(Graph, EquivalenceClassesAgreeWithDSeparation) {
  for (int n = 2; n <= 4; ++n) {
    const auto dags = enumerate_dags(n);
    std::map<std::vector<bool>, std::vector<std::size_t>> classes;
    for (std::size_t k = 0; k < dags.size(); ++k) classes[independence_model(dags[k])].push_back(k);

    for (const auto& [model, members] : classes) {
      const auto cpdag = dag_to_cpdag(dags[members.front()]);
      const auto pattern = dag_to_pattern(dags[members.front()]);
      for (std::size_t m : members) {
        EXPECT_EQ(dag_to_cpdag(dags[m]), cpdag);
        EXPECT_EQ(dag_to_pattern(dags[m]), pattern);
        EXPECT_TRUE(markov_equivalent(dags[m], dags[members.front()]));
      }
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b || !cpdag.adjacent(a, b)) continue;
          const bool always = std::all_of(members.begin(), members.end(),
                                          [&](std::size_t m) { return dags[m].has_edge(a, b); });
          EXPECT_EQ(cpdag.is_directed(a, b), always);
        }
      }
    }
    // Representatives of different classes are never declared equivalent.
    std::vector<std::size_t> reps;
    for (const auto& [model, members] : classes) reps.push_back(members.front());
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (std::size_t j = i + 1; j < reps.size(); ++j) {
        EXPECT_FALSE(markov_equivalent(dags[reps[i]], dags[reps[j]]));
        EXPECT_FALSE(dag_to_pattern(dags[reps[i]]) == dag_to_pattern(dags[reps[j]]));
      }
    }
  }
}

TEST(Graph, PatternDirectedEdgesBelongToVStructures) {
  for (const auto& dag : enumerate_dags(4)) {
    const auto pattern = dag_to_pattern(dag);
    std::set<Edge> in_v;
    for (const auto& v : v_structures(dag)) {
      in_v.insert({v.a, v.mid});
      in_v.insert({v.b, v.mid});
    }
    for (const auto& e : pattern.directed_edges()) EXPECT_TRUE(in_v.count(e));
    EXPECT_EQ(pattern.directed_edges().size(), in_v.size());
    EXPECT_EQ(to_pattern(pattern), pattern);
  }
}

TEST(Graph, RandomDagProperties) {
  Rng rng(42);
  const Dag two = random_dag(2, 1.0, rng);
  EXPECT_EQ(two.edge_count(), 1u);

  double degree_sum = 0.0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const Dag g = random_dag(12, 4.0, rng);
    const auto edges = g.edges();
    EXPECT_TRUE(is_acyclic(12, edges));
    for (const auto& e : edges) {
      const double w = std::abs(*g.weight(e.from, e.to));
      ASSERT_GT(w, 0.4);
      ASSERT_LT(w, 1.0);
    }
    degree_sum += 2.0 * static_cast<double>(g.edge_count()) / 12.0;
  }
  EXPECT_NEAR(degree_sum / draws, 4.0, 0.1);
  EXPECT_THROW(random_dag(5, 0.0, rng), InputError);
  EXPECT_THROW(random_dag(5, 4.5, rng), InputError);
}

TEST(Graph, RandomDagIsNotBiasedTowardIndexOrder) {
  Rng rng(3);
  int forward = 0, total = 0;
  for (int t = 0; t < 2000; ++t) {
    for (const auto& e : random_dag(6, 2.0, rng).edges()) {
      forward += e.from < e.to;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(forward) / total, 0.5, 0.03);
}
