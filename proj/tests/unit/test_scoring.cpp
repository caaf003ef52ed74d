#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "osem/errors.hpp"
#include "osem/scoring.hpp"
#include "test_support.hpp"

using namespace osem;

namespace {

Eigen::MatrixXd two_by_two(double rho) {
  Eigen::Matrix2d m;
  m << 1.0, rho, rho, 1.0;
  return m;
}

}  // namespace

TEST(NodeScore, Examples) {
  const ScoreContext identity(Eigen::MatrixXd::Identity(3, 3), 100.0, 1.0);
  const std::vector<int> none, one{1};
  EXPECT_NEAR(identity.node_score(0, none), -2.302585092994046, 1e-12);
  EXPECT_NEAR(identity.node_score(0, one), -4.605170185988092, 1e-12);

  const ScoreContext corr(two_by_two(0.8), 100.0, 1.0);
  const std::vector<int> parent{0};
  // -(100/2) log(1 - 0.64) - log(100)
  EXPECT_NEAR(corr.node_score(1, parent), 46.47739219061098, 1e-9);
}

TEST(NodeScore, CachedEqualsColdBitExactly) {
  Rng rng(1);
  const ScoreContext ctx(fixtures::random_correlation(6, rng), 500.0, 6.0);
  const std::vector<int> pa{4, 0, 2};
  const double cold = ctx.evaluate(1, pa);
  const double first = ctx.node_score(1, pa);
  const std::vector<int> sorted{0, 2, 4};
  const double warm = ctx.node_score(1, sorted);
  EXPECT_EQ(cold, first);
  EXPECT_EQ(first, warm);
  EXPECT_EQ(ctx.cache_size(), 1u);
}

TEST(NodeScore, RejectsVanishingConditionalVariance) {
  Eigen::Matrix3d s;
  s << 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0;
  const ScoreContext ctx(s, 100.0, 1.0);
  const std::vector<int> pa{0};
  try {
    ctx.node_score(1, pa);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
}

TEST(TotalScore, Examples) {
  const ScoreContext identity(Eigen::MatrixXd::Identity(3, 3), 100.0, 1.0);
  EXPECT_NEAR(identity.total_score(Dag(3)), -6.907755278982137, 1e-12);

  Rng rng(2);
  const ScoreContext two(fixtures::random_correlation(2, rng), 250.0, 3.0);
  EXPECT_NEAR(two.total_score(Dag::from_edges(2, std::vector<Edge>{{0, 1}})),
              two.total_score(Dag::from_edges(2, std::vector<Edge>{{1, 0}})), 1e-9);

  const ScoreContext four(fixtures::random_correlation(4, rng), 300.0, 2.0);
  const std::vector<int> forward{0, 1, 2, 3}, backward{3, 2, 1, 0};
  EXPECT_NEAR(four.total_score(Dag::complete(forward)), four.total_score(Dag::complete(backward)), 1e-9);
}

TEST(TotalScore, EquivalentDagsScoreEqually) {
  Rng rng(3);
  for (int n = 2; n <= 4; ++n) {
    const auto dags = enumerate_dags(n);
    for (int trial = 0; trial < 3; ++trial) {
      const ScoreContext ctx(fixtures::random_correlation(n, rng), 400.0, 6.0);
      for (std::size_t a = 0; a < dags.size(); ++a) {
        for (std::size_t b = a + 1; b < dags.size(); ++b) {
          if (!markov_equivalent(dags[a], dags[b])) continue;
          ASSERT_NEAR(ctx.total_score(dags[a]), ctx.total_score(dags[b]), 1e-9);
        }
      }
    }
  }
}

TEST(TotalScore, StrictlyDecreasingInPenalty) {
  Rng rng(4);
  const Eigen::MatrixXd s = fixtures::random_correlation(5, rng);
  const Dag g = Dag::from_edges(5, std::vector<Edge>{{0, 1}, {1, 2}, {3, 2}});
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.5, 1.0, 6.0, 20.0}) {
    const double score = ScoreContext(s, 200.0, lambda).total_score(g);
    EXPECT_LT(score, previous);
    previous = score;
  }
}

TEST(ScoreContext, ConcurrentLookupsAgree) {
  Rng rng(5);
  const ScoreContext ctx(fixtures::random_correlation(8, rng), 500.0, 6.0);
  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (int node = 0; node < 8; ++node) {
        for (unsigned mask = 0; mask < 256; ++mask) {
          if (mask >> node & 1u) continue;
          std::vector<int> pa;
          for (int k = 0; k < 8; ++k) {
            if (mask >> k & 1u) pa.push_back(k);
          }
          results[t].push_back(ctx.node_score(node, pa));
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 1; t < 4; ++t) EXPECT_EQ(results[t], results[0]);
  EXPECT_EQ(ctx.cache_size(), 8u * 128u);
}
