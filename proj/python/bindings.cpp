#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "osem/data.hpp"
#include "osem/em.hpp"
#include "osem/errors.hpp"
#include "osem/graph.hpp"
#include "osem/init.hpp"
#include "osem/metrics.hpp"
#include "osem/parallel.hpp"
#include "osem/predict.hpp"
#include "osem/rng.hpp"
#include "osem/scoring.hpp"
#include "osem/search.hpp"
#include "osem/simulate.hpp"

namespace py = pybind11;
using namespace osem;

namespace {

using EdgeList = std::vector<std::pair<int, int>>;

EdgeList edge_list(const std::vector<Edge>& edges) {
  EdgeList out;
  for (const auto& e : edges) out.emplace_back(e.from, e.to);
  return out;
}

Dag make_dag(int n, const EdgeList& edges) {
  Dag dag(n);
  for (const auto& [a, b] : edges) dag.add_edge(a, b);
  return dag;
}

Pdag make_pdag(int n, const EdgeList& directed, const EdgeList& undirected) {
  Pdag g(n);
  for (const auto& [a, b] : directed) g.add_directed(a, b);
  for (const auto& [a, b] : undirected) g.add_undirected(a, b);
  return g;
}

py::dict pdag_dict(const Pdag& g) {
  py::dict d;
  d["n"] = g.size();
  d["directed"] = edge_list(g.directed_edges());
  d["undirected"] = g.undirected_edges();
  return d;
}

OrdinalDataset make_dataset(const Eigen::MatrixXi& codes, std::optional<std::vector<int>> levels) {
  const auto rows = static_cast<std::size_t>(codes.rows());
  const auto cols = static_cast<std::size_t>(codes.cols());
  std::vector<int> flat(rows * cols);
  std::vector<int> lv = levels.value_or(std::vector<int>(cols, 0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      flat[r * cols + c] = codes(r, c);
      if (!levels) lv[c] = std::max(lv[c], codes(r, c) + 1);
    }
  }
  return OrdinalDataset(default_names(cols), std::move(lv), std::move(flat));
}

Eigen::MatrixXi dataset_codes(const OrdinalDataset& data) {
  Eigen::MatrixXi m(data.rows(), data.cols());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) m(r, c) = data.at(r, c);
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_osem, m) {
  m.doc() = "Ordinal structural EM for latent Gaussian DAG models";
  m.attr("__version__") = OSEM_PY_VERSION;
  m.attr("seed_scheme") = std::string(kSeedScheme);

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);

  m.def("set_max_threads", &set_max_threads, py::arg("threads"));

  m.def(
      "simulate",
      [](int n, double d, std::size_t rows, int levels, double nu, std::uint64_t seed) {
        const auto bench = make_benchmark({n, d, rows, levels, nu, seed});
        py::dict out;
        out["codes"] = dataset_codes(bench.data);
        out["levels"] = bench.data.levels();
        out["edges"] = edge_list(bench.dag.edges());
        std::vector<double> weights;
        for (const auto& e : bench.dag.edges()) weights.push_back(*bench.dag.weight(e.from, e.to));
        out["weights"] = weights;
        out["sigma"] = bench.sigma;
        out["thresholds"] = bench.thresholds.all();
        return out;
      },
      py::arg("n"), py::arg("d"), py::arg("N"), py::arg("levels") = 3, py::arg("nu") = 2.0,
      py::arg("seed") = 1);

  m.def(
      "initialize",
      [](const Eigen::MatrixXi& codes, std::optional<std::vector<int>> levels) {
        const auto init = osem::initialize(make_dataset(codes, levels));
        return py::make_tuple(init.thresholds.all(), init.sigma);
      },
      py::arg("codes"), py::arg("levels") = py::none());

  m.def(
      "fit",
      [](const Eigen::MatrixXi& codes, std::optional<std::vector<int>> levels, int K, double lam,
         int max_iter, double tol, int restarts, std::uint64_t seed) {
        OsemConfig config;
        config.mc_samples = K;
        config.penalty = lam;
        config.max_iter = max_iter;
        config.tol = tol;
        config.restarts = restarts;
        config.seed = seed;
        const auto result = osem_fit(make_dataset(codes, levels), config);
        py::dict out;
        out["n"] = result.dag.size();
        out["edges"] = edge_list(result.dag.edges());
        out["cpdag"] = pdag_dict(result.cpdag);
        out["sigma"] = result.model.sigma;
        out["thresholds"] = result.model.thresholds.all();
        std::vector<double> scores;
        for (const auto& e : result.trace.entries) scores.push_back(e.score);
        out["trace_scores"] = scores;
        out["stop_reason"] = result.trace.stop_reason;
        return out;
      },
      py::arg("codes"), py::arg("levels") = py::none(), py::arg("K") = 5, py::arg("lam") = 6.0,
      py::arg("max_iter") = 50, py::arg("tol") = 1e-3, py::arg("restarts") = 100, py::arg("seed") = 1);

  m.def(
      "score",
      [](const Eigen::MatrixXd& sigma_hat, double N, double lam, int n, const EdgeList& edges) {
        const ScoreContext ctx(sigma_hat, N, lam);
        return ctx.total_score(make_dag(n, edges));
      },
      py::arg("sigma_hat"), py::arg("N"), py::arg("lam"), py::arg("n"), py::arg("edges"));

  m.def(
      "search",
      [](const Eigen::MatrixXd& sigma_hat, double N, double lam, int restarts, std::uint64_t seed) {
        const ScoreContext ctx(sigma_hat, N, lam);
        const auto n = static_cast<int>(sigma_hat.rows());
        const auto res = search_structure(ctx, Dag::complete(n), {restarts, std::nullopt, seed});
        return py::make_tuple(edge_list(res.dag.edges()), res.score);
      },
      py::arg("sigma_hat"), py::arg("N"), py::arg("lam") = 6.0, py::arg("restarts") = 100,
      py::arg("seed") = 1);

  m.def(
      "dag_to_cpdag",
      [](int n, const EdgeList& edges) { return pdag_dict(osem::dag_to_cpdag(make_dag(n, edges))); },
      py::arg("n"), py::arg("edges"));

  m.def(
      "evaluate",
      [](int n, const EdgeList& est_directed, const EdgeList& est_undirected, const EdgeList& true_directed,
         const EdgeList& true_undirected, bool skeleton_only) {
        const auto est = make_pdag(n, est_directed, est_undirected);
        const auto truth = make_pdag(n, true_directed, true_undirected);
        const auto c = pattern_confusion(est, truth, skeleton_only);
        const auto rates = tpr_fprp(c);
        py::dict out;
        out["tp"] = c.tp;
        out["fp"] = c.fp;
        out["P"] = c.positives;
        out["tpr"] = rates.tpr;
        out["fprp"] = rates.fprp;
        out["shd"] = shd_pattern(to_pattern(est), to_pattern(truth));
        return out;
      },
      py::arg("n"), py::arg("est_directed"), py::arg("est_undirected"), py::arg("true_directed"),
      py::arg("true_undirected") = EdgeList{}, py::arg("skeleton_only") = false);

  m.def(
      "rectangle_log_prob",
      [](const Eigen::MatrixXd& sigma, const std::vector<std::vector<double>>& cuts, const std::vector<int>& x,
         int draws, std::uint64_t seed) {
        Rng rng = make_rng(seed, "ghk-row", 0);
        const auto est = osem::rectangle_log_prob(sigma, Thresholds(cuts), x, rng, {draws, 10});
        return py::make_tuple(est.log_prob, est.std_error);
      },
      py::arg("sigma"), py::arg("thresholds"), py::arg("x"), py::arg("draws") = 2000, py::arg("seed") = 1);

  m.def(
      "test_log_loss",
      [](const Eigen::MatrixXd& sigma, const std::vector<std::vector<double>>& cuts, const Eigen::MatrixXi& codes,
         std::uint64_t seed) {
        std::vector<int> levels;
        for (const auto& c : cuts) levels.push_back(static_cast<int>(c.size()) + 1);
        const auto report = osem::test_log_loss(sigma, Thresholds(cuts), make_dataset(codes, levels), seed);
        py::dict out;
        out["total"] = report.total;
        out["per_instance"] = report.per_instance;
        out["std_error"] = report.std_error;
        return out;
      },
      py::arg("sigma"), py::arg("thresholds"), py::arg("codes"), py::arg("seed") = 1);

  m.def(
      "bootstrap",
      [](const Eigen::MatrixXi& codes, int B, int max_iter, double lam, std::uint64_t seed) {
        OsemConfig config;
        config.max_iter = max_iter;
        config.penalty = lam;
        config.seed = seed;
        const auto res = bootstrap_edges(make_dataset(codes, std::nullopt), config, B);
        return py::make_tuple(res.frequency, res.failures);
      },
      py::arg("codes"), py::arg("B"), py::arg("max_iter") = 50, py::arg("lam") = 6.0, py::arg("seed") = 1);
}
