#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "osem/errors.hpp"
#include "osem/io.hpp"
#include "test_support.hpp"

using namespace osem;

TEST(FormatDouble, RoundTripsAndNonFinite) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(GraphJson, WeightedDagRoundTrip) {
  Dag dag(4);
  dag.add_edge(0, 1, 0.75);
  dag.add_edge(2, 1, -1.25);
  dag.add_edge(1, 3, 0.5);
  const Json j = dag_to_json(dag, {"a", "b", "c", "d"});
  EXPECT_EQ(j["kind"], "dag");
  EXPECT_EQ(j["names"][3], "d");
  const auto back = graph_from_json(j);
  ASSERT_TRUE(back.dag.has_value());
  EXPECT_EQ(*back.dag, dag);
  EXPECT_EQ(back.graph, as_pdag(dag));
}

TEST(GraphJson, CpdagRoundTrip) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Cpdag cpdag = dag_to_cpdag(random_dag(6, 2.5, rng));
    const auto back = graph_from_json(pdag_to_json(cpdag, "cpdag"));
    EXPECT_EQ(back.kind, "cpdag");
    EXPECT_EQ(back.graph, static_cast<const Pdag&>(cpdag));
  }
}

TEST(GraphJson, AcceptsSeparateUndirectedList) {
  const Json j = Json::parse(R"({"kind": "pdag", "n": 3, "edges": [[0, 2]], "undirected": [[0, 1]]})");
  const auto g = graph_from_json(j);
  EXPECT_TRUE(g.graph.is_directed(0, 2));
  EXPECT_TRUE(g.graph.is_undirected(0, 1));
  EXPECT_FALSE(g.dag.has_value());
}

TEST(GraphJson, RejectsMalformedInput) {
  EXPECT_THROW(graph_from_json(Json::parse(R"({"edges": []})")), InputError);
  EXPECT_THROW(graph_from_json(Json::parse(R"({"n": 2, "edges": [[0, 5]]})")), InputError);
  EXPECT_THROW(graph_from_json(Json::parse(R"({"n": 2, "edges": [[0]]})")), InputError);
  EXPECT_THROW(graph_from_json(Json::parse(R"({"n": 2, "edges": [[0, 1], [1, 0]]})")), InputError);
  EXPECT_THROW(graph_from_json(Json::parse(R"({"n": 2, "edges": [[0, 0]]})")), InputError);
  EXPECT_THROW(graph_from_json(Json::parse(R"({"n": -1})")), InputError);
}

TEST(MatrixJson, NestedAndFlat) {
  Rng rng(2);
  const Eigen::MatrixXd m = fixtures::random_correlation(4, rng);
  EXPECT_EQ(matrix_from_json(matrix_to_json(m)), m);
  const Json flat = Json::parse("[1, 0.5, 0.5, 1]");
  const Eigen::MatrixXd f = matrix_from_json(flat, 2);
  EXPECT_EQ(f(0, 1), 0.5);
  EXPECT_THROW(matrix_from_json(Json::parse("[1, 2, 3]")), InputError);
  EXPECT_THROW(matrix_from_json(Json::parse("[[1, 2], [3]]")), InputError);
  EXPECT_THROW(matrix_from_json(flat, 3), InputError);
}

TEST(ModelJson, RoundTrip) {
  Dag dag(3);
  dag.add_edge(0, 1);
  dag.add_edge(1, 2);
  ParamSet params = unit_params(dag);
  params[1].coefficients[0] = 0.6;
  params[1].variance = 0.64;
  params[2].coefficients[0] = -0.3;
  params[2].variance = 0.91;
  const Eigen::MatrixXd sigma = params_to_covariance(params, dag);
  const LatentModel model{dag, Thresholds({{-0.5, 0.5}, {0.0}, {0.1, 0.9, 1.3}}), sigma, params};
  const auto back = model_from_json(model_to_json(model, {"x", "y", "z"}));
  EXPECT_EQ(back.names, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(back.sigma, sigma);
  EXPECT_EQ(back.thresholds.all(), model.thresholds.all());
  ASSERT_TRUE(back.dag.has_value());
  EXPECT_EQ(back.dag->edges(), dag.edges());
  EXPECT_DOUBLE_EQ(*back.dag->weight(0, 1), 0.6);
}

TEST(ModelJson, RejectsMissingFields) {
  EXPECT_THROW(model_from_json(Json::parse(R"({"sigma": [[1]]})")), InputError);
  EXPECT_THROW(thresholds_from_json(Json::parse(R"([[0.5, 0.1]])")), InputError);
}

TEST(JsonFiles, WriteAndRead) {
  const auto dir = std::filesystem::temp_directory_path() / "osem_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "g.json";
  Dag dag(2);
  dag.add_edge(1, 0);
  write_json(path, dag_to_json(dag));
  EXPECT_EQ(*read_graph_json(path).dag, dag);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(read_json(dir / "bad.json"), InputError);
  EXPECT_THROW(read_json(dir / "missing.json"), InputError);
  std::filesystem::remove_all(dir);
}
