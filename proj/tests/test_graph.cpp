#include <doctest.h>

#include <algorithm>
#include <set>

#include "combo/errors.hpp"
#include "combo/graph.hpp"
#include "combo/oracle.hpp"

using namespace combo;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

std::set<std::pair<std::size_t, std::size_t>> edge_set(const SubGraph& g) {
  auto e = g.edges();
  return {e.begin(), e.end()};
}

}  // namespace

TEST_CASE("complete and path sub-graphs have the expected edges") {
  CHECK(edge_set(SubGraph::complete(3)) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(edge_set(SubGraph::path(3)) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
  const auto k1 = SubGraph::complete(1);
  CHECK(k1.size() == 1);
  CHECK(k1.edge_count() == 0);
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(SubGraph::complete(k).edge_count() == k * (k - 1) / 2);
    CHECK(SubGraph::path(k).edge_count() == k - 1);
  }
}

TEST_CASE("invalid sub-graphs are rejected") {
  CHECK_THROWS_AS(SubGraph::complete(0), InvalidVariableError);
  CHECK_THROWS_AS(SubGraph::path(0), InvalidVariableError);
  CHECK_THROWS_AS(SubGraph::custom({}), InvalidVariableError);
  CHECK_THROWS_AS(SubGraph::custom({{false, true}, {false, false}}), InvalidVariableError);
  CHECK_THROWS_AS(SubGraph::custom({{true, false}, {false, false}}), InvalidVariableError);
  CHECK_THROWS_AS(SubGraph::custom({{false, true}}), InvalidVariableError);
}

TEST_CASE("laplacian is degree minus adjacency") {
  Eigen::MatrixXd k2(2, 2);
  k2 << 1, -1, -1, 1;
  CHECK(max_abs(laplacian(SubGraph::complete(2)) - k2) == 0.0);
  Eigen::MatrixXd p3(3, 3);
  p3 << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(max_abs(laplacian(SubGraph::path(3)) - p3) == 0.0);
  const auto l3 = laplacian(SubGraph::complete(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(l3(i, j) == (i == j ? 2.0 : -1.0));
  }
  CHECK(l3.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("complete graph spectrum is 0 and k") {
  for (std::size_t k = 1; k <= 7; ++k) {
    const auto es = eigensystem(SubGraph::complete(k));
    CHECK(std::abs(es.eigenvalues(0)) < 1e-12);
    for (Eigen::Index j = 1; j < static_cast<Eigen::Index>(k); ++j) {
      CHECK(es.eigenvalues(j) == doctest::Approx(static_cast<double>(k)).epsilon(1e-14));
    }
  }
}

TEST_CASE("path spectrum matches the characteristic polynomial and an independent solver") {
  const auto es = eigensystem(SubGraph::path(3));
  // lambda (lambda - 1)(lambda - 3)
  CHECK(std::abs(es.eigenvalues(0)) < 1e-12);
  CHECK(std::abs(es.eigenvalues(1) - 1.0) < 1e-12);
  CHECK(std::abs(es.eigenvalues(2) - 3.0) < 1e-12);
  for (std::size_t n = 2; n <= 9; ++n) {
    const auto g = SubGraph::path(n);
    const auto ours = eigensystem(g);
    const auto ref = oracle::jacobi_eigen(laplacian(g));
    CHECK((ours.eigenvalues - ref.values).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("eigensystem invariants hold for complete, path and custom graphs") {
  std::vector<SubGraph> graphs;
  for (std::size_t n = 1; n <= 6; ++n) {
    graphs.push_back(SubGraph::complete(n));
    graphs.push_back(SubGraph::path(n));
  }
  // a 5-cycle and a star
  Adjacency cyc(5, std::vector<bool>(5, false));
  for (std::size_t i = 0; i < 5; ++i) cyc[i][(i + 1) % 5] = cyc[(i + 1) % 5][i] = true;
  graphs.push_back(SubGraph::custom(cyc));
  Adjacency star(4, std::vector<bool>(4, false));
  for (std::size_t i = 1; i < 4; ++i) star[0][i] = star[i][0] = true;
  graphs.push_back(SubGraph::custom(star));

  for (const auto& g : graphs) {
    const auto es = eigensystem(g);
    const auto n = static_cast<Eigen::Index>(g.size());
    CHECK(std::abs(es.eigenvalues(0)) < 1e-10);
    CHECK(std::is_sorted(es.eigenvalues.data(), es.eigenvalues.data() + n));
    CHECK(max_abs(es.eigenvectors.transpose() * es.eigenvectors - Eigen::MatrixXd::Identity(n, n)) < 1e-10);
    const Eigen::MatrixXd rec = es.eigenvectors * es.eigenvalues.asDiagonal() * es.eigenvectors.transpose();
    CHECK(max_abs(rec - laplacian(g)) < 1e-10);
  }
}

TEST_CASE("product spectrum is the multiset of pairwise sums") {
  const SearchSpace space({SubGraph::complete(2), SubGraph::complete(2)});
  const auto ref = oracle::jacobi_eigen(oracle::product_laplacian(space));
  const std::vector<double> expected{0, 2, 2, 4};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ref.values(i) - expected[static_cast<std::size_t>(i)]) < 1e-10);

  const SearchSpace mixed({SubGraph::complete(3), SubGraph::path(4), SubGraph::path(2)});
  std::vector<double> sums;
  const auto& v = mixed.variables();
  for (Eigen::Index a = 0; a < 3; ++a) {
    for (Eigen::Index b = 0; b < 4; ++b) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        sums.push_back(v[0].spectrum.eigenvalues(a) + v[1].spectrum.eigenvalues(b) + v[2].spectrum.eigenvalues(c));
      }
    }
  }
  std::sort(sums.begin(), sums.end());
  const auto direct = oracle::jacobi_eigen(oracle::product_laplacian(mixed));
  for (std::size_t i = 0; i < sums.size(); ++i) CHECK(std::abs(direct.values(static_cast<Eigen::Index>(i)) - sums[i]) < 1e-8);
}

TEST_CASE("neighbors differ in one variable along a sub-graph edge") {
  const SearchSpace k2k2({SubGraph::complete(2), SubGraph::complete(2)});
  CHECK(k2k2.neighbors({0, 0}) == std::vector<Vertex>{{0, 1}, {1, 0}});
  const SearchSpace p3({SubGraph::path(3)});
  CHECK(p3.neighbors({1}) == std::vector<Vertex>{{0}, {2}});
  const SearchSpace k3p3({SubGraph::complete(3), SubGraph::path(3)});
  const auto n = k3p3.neighbors({0, 0});
  CHECK(std::set<Vertex>(n.begin(), n.end()) == std::set<Vertex>{{1, 0}, {2, 0}, {0, 1}});

  for (std::uint64_t r = 0; r < k3p3.total_size(); ++r) {
    const Vertex v = k3p3.unrank(r);
    const auto nb = k3p3.neighbors(v);
    CHECK(nb.size() == k3p3.variable(0).graph.degree(v[0]) + k3p3.variable(1).graph.degree(v[1]));
    for (const auto& u : nb) CHECK(hamming_distance(u, v) == 1);
  }
  CHECK_THROWS_AS(static_cast<void>(k3p3.neighbors({3, 0})), BoundsError);
  CHECK_THROWS_AS(static_cast<void>(k3p3.neighbors({0})), BoundsError);
}

TEST_CASE("rank and unrank are inverse with the first variable most significant") {
  const SearchSpace s({SubGraph::complete(3), SubGraph::path(2), SubGraph::complete(4)});
  CHECK(s.total_size() == 24);
  CHECK(s.rank({1, 0, 0}) == 8);
  CHECK(s.rank({0, 1, 0}) == 4);
  for (std::uint64_t r = 0; r < s.total_size(); ++r) CHECK(s.rank(s.unrank(r)) == r);
}

TEST_CASE("total size saturates for huge spaces") {
  const SearchSpace big(std::vector<SubGraph>(70, SubGraph::complete(2)));
  CHECK(big.total_size_saturated());
  CHECK(big.log_total_size() == doctest::Approx(70 * std::log(2.0)));
  CHECK_THROWS_AS(shortest_path_oracle(big, Vertex(std::vector<Vertex::value_type>(70, 0)),
                                       Vertex(std::vector<Vertex::value_type>(70, 1))),
                  EnumerationLimitError);
}

TEST_CASE("shortest paths: Hamming on complete products, at least Hamming with paths") {
  const SearchSpace kkk({SubGraph::complete(3), SubGraph::complete(3), SubGraph::complete(2)});
  CHECK(shortest_path_oracle(kkk, {0, 1, 0}, {2, 1, 1}) == 2);
  const SearchSpace p5({SubGraph::path(5)});
  CHECK(shortest_path_oracle(p5, {0}, {4}) == 4);
  CHECK(shortest_path_oracle(kkk, {1, 2, 1}, {1, 2, 1}) == 0);
  const SearchSpace small({SubGraph::complete(2), SubGraph::complete(2)});
  CHECK_THROWS_AS(shortest_path_oracle(small, {0, 0}, {1, 1}, 3), EnumerationLimitError);
}
