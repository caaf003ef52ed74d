// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "osem/em.hpp"
#include "osem/errors.hpp"
#include "osem/init.hpp"
#include "osem/metrics.hpp"
#include "osem/normal.hpp"
#include "osem/parallel.hpp"
#include "osem/predict.hpp"
#include "osem/scoring.hpp"
#include "osem/search.hpp"
#include "osem/simulate.hpp"
#include "osem/tmvn.hpp"
#include "unit/test_support.hpp"

using namespace osem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

using ClassKey = std::pair<std::vector<Edge>, std::vector<NodePair>>;

Outcome score_equivalence() {
  Rng rng(101);
  double worst = 0.0;
  std::size_t classes = 0;
  for (int n = 2; n <= 5; ++n) {
    const auto dags = enumerate_dags(n);
    std::map<ClassKey, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < dags.size(); ++k) {
      const Cpdag c = dag_to_cpdag(dags[k]);
      groups[{c.directed_edges(), c.undirected_edges()}].push_back(k);
    }
    classes += groups.size();
    for (int trial = 0; trial < 50; ++trial) {
      const ScoreContext ctx(fixtures::random_correlation(n, rng), 500.0, 6.0);
      for (const auto& [key, members] : groups) {
        double lo = INFINITY, hi = -INFINITY;
        for (auto k : members) {
          const double s = ctx.total_score(dags[k]);
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
        worst = std::max(worst, hi - lo);
      }
    }
  }
  return {worst <= 1e-9, fmt("max in-class score spread %.3g over %zu classes x 50 matrices", worst, classes)};
}

// ---------------------------------------------------------------- 2

Outcome decomposability() {
  Rng rng(202);
  double worst = 0.0;
  int applied = 0;
  const ScoreContext ctx(fixtures::random_correlation(10, rng), 500.0, 6.0);
  ScoredDag scored(ctx, random_dag(10, 3.0, rng));
  std::uniform_int_distribution<int> node(0, 9), kind(0, 2);
  while (applied < 1000) {
    const Move move{static_cast<MoveKind>(kind(rng)), node(rng), node(rng)};
    if (move.from == move.to || !scored.is_legal(move)) continue;
    scored.apply(move);
    worst = std::max(worst, std::abs(scored.total() - ctx.total_score(scored.dag())));
    ++applied;
  }
  return {worst <= 1e-12, fmt("%d moves, max |incremental - full| = %.3g", applied, worst)};
}

// ---------------------------------------------------------------- 3

Outcome search_optimality() {
  Rng rng(303);
  int matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ScoreContext ctx(fixtures::random_correlation(4, rng, 1), 200.0, 1.0);
    const auto best = exhaustive_search(ctx, 4);
    const auto found = search_structure(ctx, Dag::complete(4), {20, std::nullopt, static_cast<std::uint64_t>(trial)});
    if (found.score >= best.score - 1e-9 * std::max(1.0, std::abs(best.score))) ++matched;
  }
  return {matched >= 95, fmt("%d/100 contexts reach the exhaustive optimum", matched)};
}

// ---------------------------------------------------------------- 4

// Bivariate normal CDF by integrating the density in rho (Plackett), Simpson rule.
double plackett_bvn(double h, double k, double rho) {
  if (!std::isfinite(h) || !std::isfinite(k)) {
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return 0.5 * std::erfc(-k / std::numbers::sqrt2);
    return 0.5 * std::erfc(-h / std::numbers::sqrt2);
  }
  auto dens = [&](double r) {
    const double q = 1.0 - r * r;
    return std::exp(-(h * h - 2.0 * r * h * k + k * k) / (2.0 * q)) / (2.0 * std::numbers::pi * std::sqrt(q));
  };
  const int m = 400;
  const double step = rho / m;
  double s = dens(0.0) + dens(rho);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * dens(i * step);
  return 0.25 * std::erfc(-h / std::numbers::sqrt2) * std::erfc(-k / std::numbers::sqrt2) + s * step / 3.0;
}

double oracle_loglik(const Eigen::MatrixXd& table, const std::vector<double>& a, const std::vector<double>& b,
                     double rho) {
  auto edges = [](const std::vector<double>& c) {
    std::vector<double> e{-INFINITY};
    e.insert(e.end(), c.begin(), c.end());
    e.push_back(INFINITY);
    return e;
  };
  const auto ea = edges(a), eb = edges(b);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      if (table(i, j) == 0.0) continue;
      const double p = plackett_bvn(ea[i + 1], eb[j + 1], rho) - plackett_bvn(ea[i], eb[j + 1], rho) -
                       plackett_bvn(ea[i + 1], eb[j], rho) + plackett_bvn(ea[i], eb[j], rho);
      ll += table(i, j) * std::log(std::max(p, 1e-300));
    }
  }
  return ll;
}

Outcome polychoric_consistency() {
  const std::vector<double> cuts_a{-0.6, 0.4}, cuts_b{-0.2, 0.5, 1.2};
  Rng rng(404);
  std::normal_distribution<double> z;
  const std::size_t rows = 10000;
  std::vector<int> codes;
  codes.reserve(rows * 2);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y1 = z(rng);
    const double y2 = 0.5 * y1 + std::sqrt(0.75) * z(rng);
    codes.push_back(static_cast<int>(std::upper_bound(cuts_a.begin(), cuts_a.end(), y1) - cuts_a.begin()));
    codes.push_back(static_cast<int>(std::upper_bound(cuts_b.begin(), cuts_b.end(), y2) - cuts_b.begin()));
  }
  const OrdinalDataset data(default_names(2), {3, 4}, codes);
  const Thresholds t = estimate_thresholds(data);
  double cut_err = 0.0;
  for (std::size_t k = 0; k < cuts_a.size(); ++k) cut_err = std::max(cut_err, std::abs(t.cuts(0)[k] - cuts_a[k]));
  for (std::size_t k = 0; k < cuts_b.size(); ++k) cut_err = std::max(cut_err, std::abs(t.cuts(1)[k] - cuts_b[k]));

  const auto c0 = data.column(0), c1 = data.column(1);
  const double rho = pairwise_correlation(c0, c1, t.cuts(0), t.cuts(1));
  const Eigen::MatrixXd table = contingency_table(c0, c1, 3, 4);
  double best_rho = 0.0, best_ll = -INFINITY;
  for (int g = -990; g <= 990; ++g) {
    const double r = g / 1000.0;
    const double ll = oracle_loglik(table, t.cuts(0), t.cuts(1), r);
    if (ll > best_ll) {
      best_ll = ll;
      best_rho = r;
    }
  }
  const bool pass = cut_err <= 0.02 && std::abs(rho - 0.5) <= 0.05 && std::abs(rho - best_rho) <= 1.5e-3;
  return {pass, fmt("max cut error %.4f, rho %.4f, grid oracle %.3f", cut_err, rho, best_rho)};
}

// ---------------------------------------------------------------- 5

Outcome tmvn_sampler() {
  const int n = 3;
  const int draws = 10000;
  const GibbsOptions opts{1, 50, 5};

  // Truncated to [0, inf): independent chains, one kept draw each.
  const GibbsKernel identity(Eigen::MatrixXd::Identity(n, n));
  const std::vector<Interval> positive(n, Interval{0.0, INFINITY});
  Eigen::MatrixXd trunc(draws, n);
  parallel_for(draws, [&](std::size_t r) {
    Rng rng = make_rng(505, "acceptance-trunc", r);
    trunc.row(r) = gibbs_sample_row(identity, positive, opts, rng);
  });
  const double target = std::sqrt(2.0 / std::numbers::pi);
  const double se_mean = std::sqrt((1.0 - 2.0 / std::numbers::pi) / draws);
  double worst_mean = 0.0;
  for (int i = 0; i < n; ++i) worst_mean = std::max(worst_mean, std::abs(trunc.col(i).mean() - target) / se_mean);

  // Untruncated with correlation: second moments against sigma.
  Eigen::Matrix3d sigma;
  sigma << 1.0, 0.5, -0.3, 0.5, 1.0, 0.2, -0.3, 0.2, 1.0;
  const GibbsKernel kernel(sigma);
  const std::vector<Interval> free_rect(n, Interval{-INFINITY, INFINITY});
  Eigen::MatrixXd full(draws, n);
  parallel_for(draws, [&](std::size_t r) {
    Rng rng = make_rng(505, "acceptance-free", r);
    full.row(r) = gibbs_sample_row(kernel, free_rect, opts, rng);
  });
  const Eigen::MatrixXd s = expected_covariance(full);
  double worst_cov = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double se = std::sqrt((sigma(a, a) * sigma(b, b) + sigma(a, b) * sigma(a, b)) / draws);
      worst_cov = std::max(worst_cov, std::abs(s(a, b) - sigma(a, b)) / se);
    }
  }
  return {worst_mean <= 3.0 && worst_cov <= 3.0,
          fmt("truncated mean max |z| = %.2f, covariance max |z| = %.2f", worst_mean, worst_cov)};
}

// ---------------------------------------------------------------- 6

Outcome em_monotonicity() {
  double worst_score = 0.0, worst_q = 0.0;
  int iterations = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BenchmarkSpec spec;
    spec.seed = seed;
    const auto bench = make_benchmark(spec);
    OsemConfig config;
    config.seed = seed;
    const auto fit = osem_fit(bench.data, config);
    for (std::size_t t = 1; t < fit.trace.entries.size(); ++t) {
      const auto& e = fit.trace.entries[t];
      worst_score = std::max(worst_score, e.score_before - e.score);
      worst_q = std::max(worst_q, e.q_before - e.q_after);
      ++iterations;
    }
  }
  return {worst_score <= 1e-8 && worst_q <= 1e-8,
          fmt("%d iterations, max score drop %.3g, max Q drop %.3g", iterations, worst_score, worst_q)};
}

// ---------------------------------------------------------------- 7

Eigen::MatrixXd code_correlation(const OrdinalDataset& data) {
  Eigen::MatrixXd x(data.rows(), data.cols());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) x(r, c) = data.at(r, c);
  }
  const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
  return covariance_to_correlation(centred.transpose() * centred / static_cast<double>(x.rows() - 1)).correlation;
}

Outcome structure_recovery() {
  double osem_tpr = 0.0, base_tpr = 0.0, osem_shd = 0.0, base_shd = 0.0;
  const int replicates = 20;
  for (int rep = 1; rep <= replicates; ++rep) {
    BenchmarkSpec spec;
    spec.seed = 1000 + rep;
    const auto bench = make_benchmark(spec);
    const Pdag truth = as_pdag(bench.dag);
    const double positives = static_cast<double>(bench.dag.edge_count());

    OsemConfig config;
    config.seed = spec.seed;
    const auto fit = osem_fit(bench.data, config);
    const auto c1 = pattern_confusion(fit.cpdag, truth);
    osem_tpr += c1.tp / positives;
    osem_shd += shd_pattern(fit.cpdag, truth) / positives;

    const ScoreContext ctx(code_correlation(bench.data), static_cast<double>(bench.data.rows()), config.penalty);
    const auto base = search_structure(ctx, Dag::complete(bench.dag.size()),
                                       {config.restarts, std::nullopt, derive_seed(spec.seed, "search", 1)});
    const auto c2 = pattern_confusion(dag_to_cpdag(base.dag), truth);
    base_tpr += c2.tp / positives;
    base_shd += shd_pattern(dag_to_cpdag(base.dag), truth) / positives;
  }
  osem_tpr /= replicates;
  base_tpr /= replicates;
  osem_shd /= replicates;
  base_shd /= replicates;
  return {osem_tpr > base_tpr && osem_shd < base_shd,
          fmt("mean TPR %.3f vs baseline %.3f, mean SHD/P %.3f vs baseline %.3f", osem_tpr, base_tpr, osem_shd,
              base_shd)};
}

// ---------------------------------------------------------------- 8

Outcome predictive_log_loss() {
  int wins = 0;
  std::string worst;
  double min_z = INFINITY;
  for (int split = 1; split <= 20; ++split) {
    BenchmarkSpec spec;
    spec.n = 10;
    spec.rows = 1000;
    spec.seed = 2000 + split;
    const auto bench = make_benchmark(spec);
    std::vector<std::size_t> order(bench.data.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(spec.seed, "acceptance-split");
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<std::size_t> train_idx(order.begin(), order.begin() + 800);
    const std::vector<std::size_t> test_idx(order.begin() + 800, order.end());
    const auto train = bench.data.select_rows(train_idx);
    const auto test = bench.data.select_rows(test_idx);

    OsemConfig config;
    config.seed = spec.seed;
    try {
      const auto fit = osem_fit(train, config);
      const auto model = test_log_loss(fit.model, test, spec.seed);
      const auto indep = test_log_loss(Eigen::MatrixXd::Identity(10, 10), fit.model.thresholds, test, spec.seed);
      // Paired difference per test row; its sampling error dominates the GHK error.
      const std::size_t m = test.rows();
      std::vector<double> diff(m);
      double mean = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        diff[r] = model.row_log_prob[r] - indep.row_log_prob[r];
        mean += diff[r] / m;
      }
      double var = 0.0;
      for (double d : diff) var += (d - mean) * (d - mean);
      var /= static_cast<double>(m - 1);
      const double ghk_se = std::hypot(model.std_error, indep.std_error) / m;
      const double se = std::sqrt(var / m + ghk_se * ghk_se);
      const double z = mean / se;
      min_z = std::min(min_z, z);
      if (z > 3.0) ++wins;
    } catch (const Error& e) {
      worst = e.what();
    }
  }
  std::string detail = fmt("%d/20 splits beat independence by > 3 SE (min z %.2f)", wins, min_z);
  if (!worst.empty()) detail += "; a split failed: " + worst;
  return {wins >= 18, detail};
}

// ---------------------------------------------------------------- 9

Outcome ghk_oracle() {
  double worst = 0.0;
  const Thresholds two({{0.0}, {0.0}});
  const std::vector<int> upper{1, 1};
  for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    Eigen::Matrix2d s;
    s << 1.0, rho, rho, 1.0;
    Rng rng = make_rng(909, "acceptance-orthant", static_cast<std::uint64_t>(std::lround(10 * rho + 10)));
    const double p = std::exp(rectangle_log_prob(s, two, upper, rng).log_prob);
    worst = std::max(worst, std::abs(p - fixtures::orthant(rho)));
  }
  Rng srng(909);
  const Eigen::MatrixXd s3 = fixtures::random_correlation(3, srng);
  const Thresholds t3({{0.3}, {-0.4}, {0.0}});
  double total = 0.0;
  for (int code = 0; code < 8; ++code) {
    const std::vector<int> x{code & 1, code >> 1 & 1, code >> 2 & 1};
    Rng rng = make_rng(909, "acceptance-partition", code);
    total += std::exp(rectangle_log_prob(s3, t3, x, rng).log_prob);
  }
  return {worst <= 1e-3 && std::abs(total - 1.0) <= 0.01,
          fmt("max orthant error %.2e, partition sum %.5f", worst, total)};
}

// ---------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
#ifndef OSEM_CLI_PATH
  return {false, "CLI executable not built"};
#else
  const fs::path root = fs::current_path() / "acceptance_cli";
  fs::remove_all(root);
  const std::vector<std::string> files{"data.csv", "data.truth.json", "fit/report.json", "fit/cpdag.json",
                                       "fit/dag.json", "fit/model.json", "fit/trace.csv", "metrics.csv"};
  std::vector<std::map<std::string, std::string>> runs;
  for (int threads : {1, 1, 4, 4}) {
    const fs::path dir = root / ("run" + std::to_string(runs.size()));
    fs::create_directories(dir);
    const std::string env = "OSEM_THREADS=" + std::to_string(threads) + " ";
    const std::string cli = std::string("\"") + OSEM_CLI_PATH + "\"";
    const std::string d = "\"" + dir.string() + "\"";
    const std::vector<std::string> steps{
        env + cli + " simulate --n 10 --d 3 --N 300 --seed 7 --out " + d + "/data.csv",
        env + cli + " learn --data " + d + "/data.csv --sidecar " + d + "/data.truth.json --max-iter 10 --seed 7 --out " +
            d + "/fit",
        env + cli + " evaluate --estimated " + d + "/fit/cpdag.json --truth " + d + "/data.truth.json --out " + d +
            "/metrics.csv"};
    for (const auto& cmd : steps) {
      if (std::system((cmd + " > /dev/null 2>&1").c_str()) != 0) return {false, "command failed: " + cmd};
    }
    std::map<std::string, std::string> contents;
    for (const auto& f : files) {
      if (!fs::exists(dir / f)) return {false, "missing output " + f};
      contents[f] = slurp(dir / f);
    }
    runs.push_back(std::move(contents));
  }
  for (std::size_t k = 1; k < runs.size(); ++k) {
    for (const auto& f : files) {
      if (runs[k].at(f) != runs[0].at(f)) return {false, "run " + std::to_string(k) + " differs in " + f};
    }
  }
  return {true, fmt("%zu files identical across 4 runs (threads 1, 1, 4, 4)", files.size())};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 score equivalence", score_equivalence},
      {"2 decomposability", decomposability},
      {"3 search optimality", search_optimality},
      {"4 threshold and polychoric consistency", polychoric_consistency},
      {"5 tmvn sampler", tmvn_sampler},
      {"6 em conditional monotonicity", em_monotonicity},
      {"7 structure recovery vs continuous baseline", structure_recovery},
      {"8 predictive log loss", predictive_log_loss},
      {"9 rectangle probability oracle", ghk_oracle},
      {"10 end-to-end determinism", cli_determinism},
  };
  // Optional filter: run only the criteria whose numbers are given.
  std::vector<bool> selected(criteria.size(), argc < 2);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
  }
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << criteria[k].first << ": " << out.detail
              << fmt(" [%.1fs]", secs) << std::endl;
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
