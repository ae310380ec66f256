#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "liberata/errors.hpp"
#include "liberata/graph_spectral.hpp"

using namespace liberata;

namespace {

SpMat sym_edges(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  std::vector<Triplet> trips;
  for (const auto& [a, b, w] : edges) {
    trips.emplace_back(a, b, w);
    trips.emplace_back(b, a, w);
  }
  SpMat m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SpMat complete_graph(int n, double w = 1.0) {
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, w});
  return sym_edges(n, edges);
}

SpMat complete_bipartite(int left, int right, double w) {
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i < left; ++i)
    for (int j = 0; j < right; ++j) edges.push_back({i, left + j, w});
  return sym_edges(left + right, edges);
}

/* Active subgraph of the reference corpus shares graph: three manuscripts
   followed by the four contributor-role columns that carry edges. */
SpMat fixture_active_graph() {
  return sym_edges(7, {{0, 3, 0.7},
                       {0, 4, 0.3},
                       {1, 4, 0.6},
                       {1, 5, 0.4},
                       {2, 5, 0.9},
                       {2, 6, 0.1}});
}

}  // namespace

TEST_CASE("eigendecompose reads off both spectrum ends") {
  SpMat edge = sym_edges(2, {{0, 1, 1.0}});
  EigenResult lo = eigendecompose(laplacian(edge), 2, SpectrumEnd::Smallest);
  CHECK(lo.values[0] == Catch::Approx(0.0).margin(1e-10));
  CHECK(lo.values[1] == Catch::Approx(2.0));

  EigenResult hi = eigendecompose(laplacian(edge), 1, SpectrumEnd::Largest);
  CHECK(hi.values[0] == Catch::Approx(2.0));

  // Orthonormal columns, first sizable coordinate positive.
  Eigen::MatrixXd gram_m = lo.vectors.transpose() * lo.vectors;
  CHECK((gram_m - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  for (int j = 0; j < 2; ++j) {
    for (long i = 0; i < 2; ++i)
      if (std::abs(lo.vectors(i, j)) > 1e-10) {
        CHECK(lo.vectors(i, j) > 0.0);
        break;
      }
  }
}

TEST_CASE("two disjoint edges carry a doubly degenerate zero eigenvalue") {
  SpMat g = sym_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  EigenResult er = eigendecompose(laplacian(g), 2, SpectrumEnd::Smallest);
  CHECK(er.values[0] == Catch::Approx(0.0).margin(1e-10));
  CHECK(er.values[1] == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("eigendecompose validates its inputs") {
  SpMat asym(2, 2);
  asym.insert(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose(asym, 1, SpectrumEnd::Smallest), NotSymmetric);

  SpMat rect(2, 3);
  CHECK_THROWS_AS(eigendecompose(rect, 1, SpectrumEnd::Smallest), DimensionMismatch);

  SpMat edge = sym_edges(2, {{0, 1, 1.0}});
  CHECK_THROWS_AS(eigendecompose(edge, 0, SpectrumEnd::Smallest), InvalidParams);
  CHECK_THROWS_AS(eigendecompose(edge, 3, SpectrumEnd::Smallest), InvalidParams);
}

TEST_CASE("iterative path handles matrices past the dense cutoff") {
  // Star graph: Laplacian spectrum {0, 1 x (n-2), n} with a clean top gap.
  const int n = 600;
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 1; i < n; ++i) edges.push_back({0, i, 1.0});
  SpMat lap = laplacian(sym_edges(n, edges));
  EigenResult top = eigendecompose(lap, 1, SpectrumEnd::Largest);
  CHECK(top.values[0] == Catch::Approx(static_cast<double>(n)).epsilon(1e-8));
  double resid = (lap * top.vectors.col(0) - top.values[0] * top.vectors.col(0)).norm();
  CHECK(resid < 1e-6 * n);
  // Deterministic across calls.
  EigenResult again = eigendecompose(lap, 1, SpectrumEnd::Largest);
  CHECK((top.vectors - again.vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("connected components agree between union-find and the spectrum") {
  SpMat single = sym_edges(3, {{0, 1, 1.0}});  // plus an isolated node
  ComponentsResult r = connected_components(single);
  CHECK(r.count == 2);
  CHECK(r.zero_eigenvalue_multiplicity == 2);
  CHECK(r.labels == std::vector<int>{0, 0, 1});

  CHECK(connected_components(SpMat(0, 0)).count == 0);

  Corpus c = testutil::fixture();
  FullShares f = expand_full(build_condensed(c));
  ComponentsResult fx = connected_components(f.mat);
  CHECK(fx.count == 6);  // one active component, five idle role columns
  CHECK(fx.zero_eigenvalue_multiplicity == 6);
  // All manuscripts and every active contributor-role node share a component.
  CHECK(fx.labels[0] == fx.labels[1]);
  CHECK(fx.labels[1] == fx.labels[2]);
  CHECK(fx.labels[0] == fx.labels[f.contributor_node(0, Role::PeerReviewer)]);
}

TEST_CASE("component counts match the oracle on random sparse graphs") {
  testutil::TestRng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng.below(49));
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.u01() < 2.0 / n) edges.push_back({i, j, 0.25 + rng.u01()});
    SpMat g = sym_edges(n, edges);
    ComponentsResult r = connected_components(g);  // throws on any disagreement
    CHECK(r.count == testutil::component_count_oracle(g));
  }
}

TEST_CASE("fiedler embedding orders a path and rejects disconnection") {
  SpMat path = sym_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  Eigen::VectorXd f = fiedler_embedding(path);
  CHECK(f[0] > f[1]);
  CHECK(f[1] > f[2]);
  CHECK(f[0] > 0.0);  // sign convention

  SpMat split = sym_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_AS(fiedler_embedding(split), DisconnectedGraph);

  Eigen::VectorXd k4 = fiedler_embedding(complete_graph(4));
  CHECK(k4.sum() == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("spectral clustering recovers planted cliques deterministically") {
  // Two 4-cliques with no connection.
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      edges.push_back({i, j, 1.0});
      edges.push_back({4 + i, 4 + j, 1.0});
    }
  SpMat g = sym_edges(8, edges);
  std::vector<int> labels = cluster(g, 2, SpectrumEnd::Smallest);
  CHECK(labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
  CHECK(cluster(g, 2, SpectrumEnd::Smallest) == labels);  // repeatable

  CHECK(cluster(g, 1) == std::vector<int>(8, 0));

  SpMat p4 = sym_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  CHECK(cluster(p4, 4) == std::vector<int>{0, 1, 2, 3});

  CHECK_THROWS_AS(cluster(g, 0), InvalidParams);
  CHECK_THROWS_AS(cluster(g, 9), InvalidParams);
}

TEST_CASE("closed-form bipartite tree counts") {
  TreeCounts counts = spanning_tree_counts(
      complete_bipartite(2, 2, 1.0), BipartiteShape{2, 2, 1.0});
  REQUIRE(counts.log_tau_c.has_value());
  CHECK(tau_value(*counts.log_tau_c).value() == Catch::Approx(4.0));  // 2^1 * 2^1
  CHECK(tau_value(counts.log_tau_k).value() == Catch::Approx(4.0));
}

TEST_CASE("Kirchhoff counts: triangle, single weighted edge, and K8") {
  CHECK(tau_value(spanning_tree_counts(complete_graph(3)).log_tau_k).value() ==
        Catch::Approx(3.0));

  TreeCounts edge = spanning_tree_counts(sym_edges(2, {{0, 1, 0.5}}));
  CHECK(tau_value(edge.log_tau_kw).value() == Catch::Approx(0.5));
  CHECK(tau_value(edge.log_tau_k).value() == Catch::Approx(1.0));

  TreeCounts k8 = spanning_tree_counts(complete_graph(8));
  CHECK(std::llround(tau_value(k8.log_tau_k).value()) == 262144);  // 8^6

  TreeCounts split = spanning_tree_counts(sym_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
  CHECK_FALSE(split.connected);
  CHECK(tau_value(split.log_tau_k).value() == 0.0);

  CHECK_FALSE(tau_value(800.0).has_value());  // overflows a double
}

TEST_CASE("Kirchhoff counts match brute-force enumeration on random graphs") {
  testutil::TestRng rng(17);
  int connected_seen = 0;
  while (connected_seen < 12) {
    int n = 3 + static_cast<int>(rng.below(6));
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.u01() < 0.6) edges.push_back({i, j, 0.25 + rng.u01()});
    SpMat g = sym_edges(n, edges);
    TreeCounts counts = spanning_tree_counts(g);
    if (!counts.connected) continue;
    ++connected_seen;
    Eigen::MatrixXd dense = to_dense(g);
    double weighted = testutil::spanning_tree_weight_oracle(dense);
    Eigen::MatrixXd binary = (dense.array() != 0.0).cast<double>();
    double unweighted = testutil::spanning_tree_weight_oracle(binary);
    CHECK(tau_value(counts.log_tau_kw).value() ==
          Catch::Approx(weighted).epsilon(1e-9));
    CHECK(tau_value(counts.log_tau_k).value() ==
          Catch::Approx(unweighted).epsilon(1e-9));
  }
}

TEST_CASE("tree ratios are one on the uniform complete bipartite graph") {
  const double s = 1.0 / 3.0;
  TreeCounts counts =
      spanning_tree_counts(complete_bipartite(2, 3, s), BipartiteShape{2, 3, s});
  TreeRatios r = tree_ratios(counts);
  REQUIRE(r.str.has_value());
  REQUIRE(r.str_w.has_value());
  REQUIRE(r.rstr.has_value());
  CHECK(*r.str == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(*r.str_w == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(*r.rstr == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tree ratios report absence with a reason") {
  TreeCounts split = spanning_tree_counts(sym_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}}),
                                          BipartiteShape{2, 2, 0.5});
  TreeRatios r = tree_ratios(split);
  CHECK_FALSE(r.str.has_value());
  CHECK(r.reason.find("disconnected") != std::string::npos);

  TreeCounts bare = spanning_tree_counts(complete_graph(3));
  TreeRatios no_shape = tree_ratios(bare);
  CHECK_FALSE(no_shape.str.has_value());
  CHECK(no_shape.reason.find("shape") != std::string::npos);
}

TEST_CASE("reference corpus shares graph: shape, counts, and ratios") {
  Corpus c = testutil::fixture();
  BipartiteShape shape = bipartite_shape_of(build_condensed(c));
  CHECK(shape.n_left == 3);
  CHECK(shape.n_right == 4);
  CHECK(shape.uniform_share == Catch::Approx(0.5));

  TreeCounts counts = spanning_tree_counts(fixture_active_graph(), shape);
  CHECK(counts.connected);
  CHECK(tau_value(*counts.log_tau_c).value() == Catch::Approx(432.0));  // 3^3 * 4^2
  CHECK(tau_value(*counts.log_tau_cw).value() == Catch::Approx(6.75));  // 432 / 2^6
  // The active subgraph is itself a tree: one unweighted spanning tree whose
  // weighted count is the product of all six share weights.
  CHECK(tau_value(counts.log_tau_k).value() == Catch::Approx(1.0));
  CHECK(tau_value(counts.log_tau_kw).value() ==
        Catch::Approx(0.7 * 0.3 * 0.6 * 0.4 * 0.9 * 0.1));

  // tau_k = 1 zeroes the unweighted denominator log, so only the weighted
  // ratio is defined; cross-check it against the direct log ratio.
  TreeRatios r = tree_ratios(counts);
  CHECK_FALSE(r.str.has_value());
  CHECK_FALSE(r.rstr.has_value());
  REQUIRE(r.str_w.has_value());
  CHECK(*r.str_w == Catch::Approx(std::log(6.75) / std::log(0.004536)));
  CHECK(r.reason.find("tau_k = 1") != std::string::npos);
}
