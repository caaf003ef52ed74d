#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "osem/em.hpp"
#include "osem/graph.hpp"
#include "osem/latent_model.hpp"
#include "osem/predict.hpp"
#include "osem/simulate.hpp"

namespace osem {

using Json = nlohmann::ordered_json;

// Graph files: {"kind": "dag" | "cpdag" | "pattern" | "pdag", "n": n, "names": [...],
//               "edges": [[from, to] or [from, to, weight], ...]}
// An undirected edge a - b appears as two entries {"from": a, "to": b, "undirected": true}
// and {"from": b, "to": a, "undirected": true}. A separate "undirected": [[a, b], ...]
// list is also accepted on input.
Json dag_to_json(const Dag& dag, const std::vector<std::string>& names = {});
Json pdag_to_json(const Pdag& graph, const std::string& kind, const std::vector<std::string>& names = {});

struct GraphFile {
  std::string kind;
  Pdag graph;
  std::optional<Dag> dag;  // set when every adjacency is directed and acyclic
};

/// Throws InputError on malformed content.
GraphFile graph_from_json(const Json& j);
GraphFile read_graph_json(const std::filesystem::path& path);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j, std::optional<Eigen::Index> n = std::nullopt);

Json thresholds_to_json(const Thresholds& t);
Thresholds thresholds_from_json(const Json& j);

/// Model file: names, thresholds, sigma and optionally the DAG with node parameters.
Json model_to_json(const LatentModel& model, const std::vector<std::string>& names = {});
struct ModelFile {
  std::vector<std::string> names;
  Eigen::MatrixXd sigma;
  Thresholds thresholds;
  std::optional<Dag> dag;
};
ModelFile model_from_json(const Json& j);
ModelFile read_model_json(const std::filesystem::path& path);

Json benchmark_sidecar(const Benchmark& bench, const BenchmarkSpec& spec);

Json config_to_json(const OsemConfig& config);
Json fit_report(const OsemResult& result, const OsemConfig& config,
                const std::vector<std::string>& names, bool with_timing = false);
void write_trace_csv(const std::filesystem::path& path, const FitTrace& trace, bool with_timing = false);

Json bootstrap_to_json(const BootstrapResult& result, const std::vector<std::string>& names = {});

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);

}  // namespace osem
