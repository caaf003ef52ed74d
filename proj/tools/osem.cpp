// osem: command-line front end for simulation, structure learning, evaluation and prediction.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osem/data.hpp"
#include "osem/em.hpp"
#include "osem/errors.hpp"
#include "osem/io.hpp"
#include "osem/metrics.hpp"
#include "osem/parallel.hpp"
#include "osem/predict.hpp"
#include "osem/rng.hpp"
#include "osem/simulate.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct FitFlags {
  std::string data;
  std::string sidecar;
  osem::OsemConfig config;
  int max_parents = -1;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--data", f.data, "Ordinal dataset CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--sidecar", f.sidecar, "Sidecar JSON declaring the level counts")->check(CLI::ExistingFile);
  cmd->add_option("--K", f.config.mc_samples, "Monte Carlo completions per observation")->capture_default_str();
  cmd->add_option("--lambda", f.config.penalty, "BIC penalty multiplier")->capture_default_str();
  cmd->add_option("--max-iter", f.config.max_iter, "Maximum EM iterations")->capture_default_str();
  cmd->add_option("--tol", f.config.tol, "Convergence tolerance on the correlation matrix")->capture_default_str();
  cmd->add_option("--restarts", f.config.restarts, "Random restarts of the structure search")->capture_default_str();
  cmd->add_option("--burn-in", f.config.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  cmd->add_option("--thin", f.config.thin, "Gibbs thinning interval")->capture_default_str();
  cmd->add_option("--max-parents", f.max_parents, "Cap on parents per node (-1: none)")->capture_default_str();
  cmd->add_option("--seed", f.config.seed, "Master seed")->capture_default_str();
}

osem::OsemConfig resolved_config(const FitFlags& f) {
  osem::OsemConfig c = f.config;
  if (f.max_parents >= 0) c.max_parents = f.max_parents;
  c.validate();
  return c;
}

osem::OrdinalDataset load_dataset(const std::string& path, const std::string& sidecar) {
  std::optional<std::vector<int>> levels;
  if (!sidecar.empty()) {
    const auto j = osem::read_json(sidecar);
    if (!j.contains("levels")) throw osem::InputError(sidecar + ": no 'levels' entry");
    levels = j["levels"].get<std::vector<int>>();
  }
  return osem::read_dataset_csv(path, levels);
}

// Accepts a bare graph file or any JSON object carrying one under "cpdag" or "dag".
osem::GraphFile load_graph(const std::string& path) {
  const auto j = osem::read_json(path);
  if (j.is_object() && !j.contains("edges")) {
    if (j.contains("cpdag")) return osem::graph_from_json(j["cpdag"]);
    if (j.contains("dag")) return osem::graph_from_json(j["dag"]);
  }
  return osem::graph_from_json(j);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  ensure_parent(path);
  file.open(path);
  if (!file) throw osem::InputError("cannot write " + path);
  return file;
}

// ---- simulate

struct SimulateFlags {
  osem::BenchmarkSpec spec;
  std::string out = "data.csv";
  std::string sidecar;
};

int run_simulate(const SimulateFlags& f) {
  const auto bench = osem::make_benchmark(f.spec);
  fs::path out(f.out);
  fs::path sidecar = f.sidecar.empty() ? fs::path(out).replace_extension(".truth.json") : fs::path(f.sidecar);
  ensure_parent(out);
  ensure_parent(sidecar);
  osem::write_dataset_csv(out, bench.data);
  osem::write_json(sidecar, osem::benchmark_sidecar(bench, f.spec));
  return 0;
}

// ---- learn

struct LearnFlags {
  FitFlags fit;
  std::string out = "osem-out";
  bool timing = false;
};

int run_learn(const LearnFlags& f) {
  const auto config = resolved_config(f.fit);
  const auto data = load_dataset(f.fit.data, f.fit.sidecar);
  const auto result = osem::osem_fit(data, config);
  const fs::path dir(f.out);
  fs::create_directories(dir);
  osem::write_json(dir / "report.json", osem::fit_report(result, config, data.names(), f.timing));
  osem::write_json(dir / "cpdag.json", osem::pdag_to_json(result.cpdag, "cpdag", data.names()));
  osem::write_json(dir / "dag.json", osem::dag_to_json(result.dag, data.names()));
  osem::write_json(dir / "model.json", osem::model_to_json(result.model, data.names()));
  osem::write_trace_csv(dir / "trace.csv", result.trace, f.timing);
  return 0;
}

// ---- evaluate

struct EvaluateFlags {
  std::vector<std::string> estimated;
  std::string truth;
  bool skeleton_only = false;
  std::string run_id = "0";
  std::string method = "osem";
  double lambda = 6.0;
  double seconds = 0.0;
  std::string out;
};

int run_evaluate(const EvaluateFlags& f) {
  const auto truth = load_graph(f.truth);
  std::ofstream file;
  std::ostringstream rows;
  rows << "run_id,method,lambda,tpr,fprp,shd,seconds\n";
  for (const auto& path : f.estimated) {
    const auto est = load_graph(path);
    const auto confusion = osem::pattern_confusion(est.graph, truth.graph, f.skeleton_only);
    const auto rates = osem::tpr_fprp(confusion);
    const int shd = osem::shd_pattern(osem::to_pattern(est.graph), osem::to_pattern(truth.graph));
    rows << f.run_id << ',' << f.method << ',' << osem::format_double(f.lambda) << ','
         << osem::format_double(rates.tpr) << ',' << osem::format_double(rates.fprp) << ',' << shd << ','
         << osem::format_double(f.seconds) << '\n';
  }
  open_output(f.out, file) << rows.str();
  return 0;
}

// ---- predict

struct PredictFlags {
  std::string model;
  std::string test;
  int draws = 2000;
  int shifts = 10;
  std::uint64_t seed = 1;
  std::string split = "0";
  std::string method = "osem";
  std::string out;
};

int run_predict(const PredictFlags& f) {
  const auto model = osem::read_model_json(f.model);
  const auto test = osem::read_dataset_csv(f.test);
  const auto report = osem::test_log_loss(model.sigma, model.thresholds, test, f.seed, {f.draws, f.shifts});
  std::ofstream file;
  std::ostringstream rows;
  rows << "split,method,total,per_instance,std_error\n"
       << f.split << ',' << f.method << ',' << osem::format_double(report.total) << ','
       << osem::format_double(report.per_instance) << ',' << osem::format_double(report.std_error) << '\n';
  open_output(f.out, file) << rows.str();
  return 0;
}

// ---- bootstrap

struct BootstrapFlags {
  FitFlags fit;
  int replicates = 100;
  std::string out;
};

int run_bootstrap(const BootstrapFlags& f) {
  const auto config = resolved_config(f.fit);
  const auto data = load_dataset(f.fit.data, f.fit.sidecar);
  const auto result = osem::bootstrap_edges(data, config, f.replicates);
  std::ofstream file;
  open_output(f.out, file) << osem::bootstrap_to_json(result, data.names()).dump(2) << '\n';
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const osem::NumericError& e) {
    std::cerr << "osem: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const osem::Error& e) {
    std::cerr << "osem: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "osem: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "osem: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "osem: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal structural EM for latent Gaussian DAG models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("osem ") + OSEM_VERSION + " (seed scheme " +
                                        std::string(osem::kSeedScheme) + ")");
  app.set_config("--config", "", "key = value settings file; command-line flags take precedence");
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: OSEM_THREADS or all cores)");

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a benchmark dataset with known structure");
  simulate->add_option("--n", sim.spec.n, "Number of variables")->capture_default_str();
  simulate->add_option("--d", sim.spec.d, "Expected neighbours per node")->capture_default_str();
  simulate->add_option("--N", sim.spec.rows, "Number of observations")->capture_default_str();
  simulate->add_option("--levels", sim.spec.expected_levels, "Expected number of levels")->capture_default_str();
  simulate->add_option("--nu", sim.spec.nu, "Dirichlet concentration")->capture_default_str();
  simulate->add_option("--seed", sim.spec.seed, "Master seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Dataset CSV path")->capture_default_str();
  simulate->add_option("--sidecar", sim.sidecar, "Ground-truth JSON path (default: <out>.truth.json)");

  LearnFlags learn_flags;
  auto* learn = app.add_subcommand("learn", "Fit a DAG to ordinal data");
  add_fit_flags(learn, learn_flags.fit);
  learn->add_option("--out", learn_flags.out, "Output directory")->capture_default_str();
  learn->add_flag("--timing", learn_flags.timing, "Record wall-clock times in the report and trace");

  EvaluateFlags eval;
  auto* evaluate = app.add_subcommand("evaluate", "Pattern TPR, FPRp and SHD against a true graph");
  evaluate->add_option("--estimated", eval.estimated, "Estimated graph JSON (repeatable)")->required();
  evaluate->add_option("--truth", eval.truth, "True graph JSON or simulation sidecar")->required();
  evaluate->add_flag("--skeleton-only", eval.skeleton_only, "Ignore edge orientation");
  evaluate->add_option("--run-id", eval.run_id, "Run identifier column")->capture_default_str();
  evaluate->add_option("--method", eval.method, "Method tag column")->capture_default_str();
  evaluate->add_option("--lambda", eval.lambda, "Penalty column")->capture_default_str();
  evaluate->add_option("--seconds", eval.seconds, "Runtime column")->capture_default_str();
  evaluate->add_option("--out", eval.out, "Metrics CSV (default: stdout)");

  PredictFlags pred;
  auto* predict = app.add_subcommand("predict", "Held-out log likelihood of a fitted model");
  predict->add_option("--model", pred.model, "Model JSON (sigma and thresholds)")->required();
  predict->add_option("--test", pred.test, "Test dataset CSV")->required();
  predict->add_option("--draws", pred.draws, "GHK draws per row")->capture_default_str();
  predict->add_option("--shifts", pred.shifts, "Random lattice shifts per row")->capture_default_str();
  predict->add_option("--seed", pred.seed, "Master seed")->capture_default_str();
  predict->add_option("--split", pred.split, "Split identifier column")->capture_default_str();
  predict->add_option("--method", pred.method, "Method tag column")->capture_default_str();
  predict->add_option("--out", pred.out, "Log-loss CSV (default: stdout)");

  BootstrapFlags boot;
  auto* bootstrap = app.add_subcommand("bootstrap", "Bootstrap edge frequencies of the CPDAG");
  add_fit_flags(bootstrap, boot.fit);
  bootstrap->add_option("--B", boot.replicates, "Bootstrap replicates")->capture_default_str();
  bootstrap->add_option("--out", boot.out, "Frequency JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (threads < 0) {
    std::cerr << "osem: input error: --threads must be positive\n";
    return kExitInput;
  }
  if (threads > 0) osem::set_max_threads(threads);

  if (*simulate) return guarded([&] { return run_simulate(sim); });
  if (*learn) return guarded([&] { return run_learn(learn_flags); });
  if (*evaluate) return guarded([&] { return run_evaluate(eval); });
  if (*predict) return guarded([&] { return run_predict(pred); });
  return guarded([&] { return run_bootstrap(boot); });
}
