#include "osem/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "osem/errors.hpp"
#include "osem/rng.hpp"

namespace osem {

namespace {

std::vector<std::string> names_or_default(const std::vector<std::string>& names, std::size_t n) {
  return names.empty() ? default_names(n) : names;
}

int node_index(const Json& v, int n) {
  if (!v.is_number_integer()) throw InputError("graph file: node index must be an integer");
  const int i = v.get<int>();
  if (i < 0 || i >= n) throw InputError("graph file: node index " + std::to_string(i) + " outside [0, n)");
  return i;
}

double number(const Json& v, const char* what) {
  if (v.is_null()) return std::nan("");
  if (!v.is_number()) throw InputError(std::string("expected a number for ") + what);
  return v.get<double>();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json dag_to_json(const Dag& dag, const std::vector<std::string>& names) {
  Json j;
  j["kind"] = "dag";
  j["n"] = dag.size();
  j["names"] = names_or_default(names, dag.size());
  Json edges = Json::array();
  for (const auto& e : dag.edges()) {
    if (const auto w = dag.weight(e.from, e.to)) {
      edges.push_back({e.from, e.to, *w});
    } else {
      edges.push_back({e.from, e.to});
    }
  }
  j["edges"] = std::move(edges);
  return j;
}

Json pdag_to_json(const Pdag& graph, const std::string& kind, const std::vector<std::string>& names) {
  Json j;
  j["kind"] = kind;
  j["n"] = graph.size();
  j["names"] = names_or_default(names, graph.size());
  Json edges = Json::array();
  for (const auto& e : graph.directed_edges()) edges.push_back({e.from, e.to});
  for (const auto& [a, b] : graph.undirected_edges()) {
    edges.push_back({{"from", a}, {"to", b}, {"undirected", true}});
    edges.push_back({{"from", b}, {"to", a}, {"undirected", true}});
  }
  j["edges"] = std::move(edges);
  return j;
}

GraphFile graph_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n")) throw InputError("graph file: missing field 'n'");
  const Json& jn = j["n"];
  if (!jn.is_number_integer() || jn.get<int>() < 0) throw InputError("graph file: 'n' must be a non-negative integer");
  const int n = jn.get<int>();
  GraphFile out{j.value("kind", std::string("dag")), Pdag(n), std::nullopt};

  std::vector<std::pair<Edge, std::optional<double>>> directed;
  std::vector<NodePair> undirected;
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) throw InputError("graph file: 'edges' must be an array");
    for (const auto& e : j["edges"]) {
      if (e.is_array()) {
        if (e.size() != 2 && e.size() != 3) throw InputError("graph file: edge must be [from, to] or [from, to, weight]");
        std::optional<double> w;
        if (e.size() == 3) w = number(e[2], "edge weight");
        directed.push_back({{node_index(e[0], n), node_index(e[1], n)}, w});
      } else if (e.is_object() && e.contains("from") && e.contains("to")) {
        const int a = node_index(e["from"], n);
        const int b = node_index(e["to"], n);
        if (e.value("undirected", false)) {
          undirected.emplace_back(std::min(a, b), std::max(a, b));
        } else {
          std::optional<double> w;
          if (e.contains("weight")) w = number(e["weight"], "edge weight");
          directed.push_back({{a, b}, w});
        }
      } else {
        throw InputError("graph file: unrecognised edge entry");
      }
    }
  }
  if (j.contains("undirected")) {
    if (!j["undirected"].is_array()) throw InputError("graph file: 'undirected' must be an array");
    for (const auto& e : j["undirected"]) {
      if (!e.is_array() || e.size() != 2) throw InputError("graph file: undirected edge must be [a, b]");
      const int a = node_index(e[0], n);
      const int b = node_index(e[1], n);
      undirected.emplace_back(std::min(a, b), std::max(a, b));
    }
  }

  // Each undirected edge may be listed once per direction.
  std::sort(undirected.begin(), undirected.end());
  undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());
  try {
    for (const auto& [e, w] : directed) out.graph.add_directed(e.from, e.to);
    for (const auto& [a, b] : undirected) out.graph.add_undirected(a, b);
  } catch (const StructuralError& e) {
    throw InputError(std::string("graph file: ") + e.what());
  }
  if (undirected.empty()) {
    std::vector<Edge> edges;
    for (const auto& d : directed) edges.push_back(d.first);
    if (is_acyclic(n, edges)) {
      Dag dag(n);
      for (const auto& [e, w] : directed) dag.add_edge(e.from, e.to, w);
      out.dag = std::move(dag);
    }
  }
  if (out.kind == "dag" && !out.dag) throw InputError("graph file: kind 'dag' but the edges do not form a DAG");
  return out;
}

GraphFile read_graph_json(const std::filesystem::path& path) { return graph_from_json(read_json(path)); }

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, std::optional<Eigen::Index> n) {
  if (!j.is_array()) throw InputError("matrix must be a JSON array");
  Eigen::MatrixXd m;
  if (!j.empty() && j[0].is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) throw InputError("matrix rows differ in length");
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(j[r][c], "matrix entry");
    }
  } else {
    const auto size = static_cast<Eigen::Index>(j.size());
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(size))));
    if (side * side != size) throw InputError("flat matrix length is not a perfect square");
    m.resize(side, side);
    for (Eigen::Index k = 0; k < size; ++k) m(k / side, k % side) = number(j[k], "matrix entry");
  }
  if (n && (m.rows() != *n || m.cols() != *n)) throw InputError("matrix has the wrong dimension");
  if (!m.allFinite()) throw InputError("matrix has non-finite entries");
  return m;
}

Json thresholds_to_json(const Thresholds& t) { return t.all(); }

Thresholds thresholds_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("thresholds must be an array of arrays");
  std::vector<std::vector<double>> cuts;
  for (const auto& col : j) {
    if (!col.is_array()) throw InputError("thresholds must be an array of arrays");
    std::vector<double> c;
    for (const auto& v : col) c.push_back(number(v, "threshold"));
    cuts.push_back(std::move(c));
  }
  return Thresholds(std::move(cuts));
}

Json model_to_json(const LatentModel& model, const std::vector<std::string>& names) {
  Dag weighted = model.dag;
  for (int i = 0; i < weighted.size() && !model.node_params.empty(); ++i) {
    const auto& p = model.node_params[i];
    for (std::size_t k = 0; k < p.parents.size(); ++k) weighted.set_weight(p.parents[k], i, p.coefficients[k]);
  }
  Json j;
  j["names"] = names_or_default(names, model.thresholds.size());
  j["thresholds"] = thresholds_to_json(model.thresholds);
  j["sigma"] = matrix_to_json(model.sigma);
  j["dag"] = dag_to_json(weighted, names);
  Json variances = Json::array();
  for (const auto& p : model.node_params) variances.push_back(p.variance);
  j["variances"] = std::move(variances);
  return j;
}

ModelFile model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("sigma") || !j.contains("thresholds")) {
    throw InputError("model file: needs 'sigma' and 'thresholds'");
  }
  ModelFile out;
  out.thresholds = thresholds_from_json(j["thresholds"]);
  const auto n = static_cast<Eigen::Index>(out.thresholds.size());
  out.sigma = matrix_from_json(j["sigma"], n);
  out.names = j.contains("names") ? j["names"].get<std::vector<std::string>>() : default_names(n);
  if (static_cast<Eigen::Index>(out.names.size()) != n) throw InputError("model file: names length mismatch");
  if (j.contains("dag")) out.dag = graph_from_json(j["dag"]).dag;
  return out;
}

ModelFile read_model_json(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

Json benchmark_sidecar(const Benchmark& bench, const BenchmarkSpec& spec) {
  Json j;
  j["seed"] = spec.seed;
  j["seed_scheme"] = std::string(kSeedScheme);
  j["n"] = spec.n;
  j["d"] = spec.d;
  j["N"] = spec.rows;
  j["expected_levels"] = spec.expected_levels;
  j["nu"] = spec.nu;
  j["levels"] = bench.data.levels();
  j["names"] = bench.data.names();
  j["cell_probs"] = bench.cell_probs;
  j["thresholds"] = thresholds_to_json(bench.thresholds);
  j["sigma"] = matrix_to_json(bench.sigma);
  j["dag"] = dag_to_json(bench.dag, bench.data.names());
  j["cpdag"] = pdag_to_json(dag_to_cpdag(bench.dag), "cpdag", bench.data.names());
  return j;
}

Json config_to_json(const OsemConfig& c) {
  Json j;
  j["K"] = c.mc_samples;
  j["lambda"] = c.penalty;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["burn_in"] = c.burn_in;
  j["thin"] = c.thin;
  j["restarts"] = c.restarts;
  j["max_parents"] = c.max_parents ? Json(*c.max_parents) : Json(nullptr);
  j["subset_limit"] = c.subset_limit;
  j["seed"] = c.seed;
  return j;
}

Json fit_report(const OsemResult& result, const OsemConfig& config, const std::vector<std::string>& names,
                bool with_timing) {
  Json j;
  j["config"] = config_to_json(config);
  j["seed_scheme"] = std::string(kSeedScheme);
  j["iterations"] = static_cast<int>(result.trace.entries.size()) - 1;
  j["stop_reason"] = result.trace.stop_reason;
  j["score"] = result.trace.entries.back().score;
  Json trace = Json::array();
  for (const auto& e : result.trace.entries) {
    Json row;
    row["iteration"] = e.iteration;
    row["score"] = e.score;
    row["score_before"] = e.score_before;
    row["q_before"] = e.q_before;
    row["q_after"] = e.q_after;
    row["sigma_change"] = e.sigma_change;
    row["edges"] = e.dag.edge_count();
    row["sample_seed"] = e.sample_seed;
    if (with_timing) row["seconds"] = e.seconds;
    trace.push_back(std::move(row));
  }
  j["trace"] = std::move(trace);
  j["dag"] = dag_to_json(result.dag, names);
  j["cpdag"] = pdag_to_json(result.cpdag, "cpdag", names);
  j["model"] = model_to_json(result.model, names);
  if (with_timing) {
    double total = 0.0;
    for (const auto& e : result.trace.entries) total += e.seconds;
    j["seconds"] = total;
  }
  return j;
}

void write_trace_csv(const std::filesystem::path& path, const FitTrace& trace, bool with_timing) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "iteration,score,score_before,q_before,q_after,sigma_change,edges";
  if (with_timing) out << ",seconds";
  out << '\n';
  for (const auto& e : trace.entries) {
    out << e.iteration << ',' << format_double(e.score) << ',' << format_double(e.score_before) << ','
        << format_double(e.q_before) << ',' << format_double(e.q_after) << ',' << format_double(e.sigma_change)
        << ',' << e.dag.edge_count();
    if (with_timing) out << ',' << format_double(e.seconds);
    out << '\n';
  }
}

Json bootstrap_to_json(const BootstrapResult& result, const std::vector<std::string>& names) {
  Json j;
  j["B"] = result.replicates;
  j["failures"] = result.failures;
  j["names"] = names_or_default(names, static_cast<std::size_t>(result.frequency.rows()));
  j["frequency"] = matrix_to_json(result.frequency);
  return j;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace osem
