#pragma once

// Slow, dense reference implementations used to cross-check the library. None of these
// call into Eigen's decompositions; they are written out by hand so that a bug in the
// fast path cannot hide behind the same solver.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "combo/graph.hpp"
#include "combo/surrogate.hpp"

namespace combo::oracle {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column j pairs with values(j)
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below tol.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-14, int max_sweeps = 100);

/// Gauss-Jordan elimination with partial pivoting. Throws NumericError on a zero pivot.
Eigen::MatrixXd gauss_jordan_inverse(const Eigen::MatrixXd& a);

/// Kronecker product, written out.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// sum_i weights[i] * (I x ... x L_i x ... x I), first variable most significant so that
/// row/column r corresponds to space.unrank(r).
Eigen::MatrixXd product_laplacian(const SearchSpace& space, std::span<const double> weights = {});

/// exp(-sum_i beta_i L_i) on the full product graph from a Jacobi decomposition,
/// optionally divided by the mean of its eigenvalue exponentials.
Eigen::MatrixXd dense_diffusion_kernel(const SearchSpace& space, std::span<const double> betas,
                                       bool normalize = true);

/// Unit-signal Gram of `points` read off a dense product kernel.
Eigen::MatrixXd gram_from_dense(const SearchSpace& space, const Eigen::MatrixXd& dense,
                                std::span<const Vertex> x1, std::span<const Vertex> x2);

struct DenseGp {
  double nll = 0.0;
  std::vector<PredictiveDistribution> predictions;
};

/// GP marginal likelihood and predictions from an explicit inverse and Jacobi log-det.
DenseGp dense_gp(const SearchSpace& space, const Dataset& data, const GpParams& params,
                 std::span<const Vertex> queries);

/// argmin of f over every vertex of the space; ties go to the lowest rank.
std::pair<Vertex, double> brute_force_minimum(const SearchSpace& space,
                                              const std::function<double(const Vertex&)>& f,
                                              std::uint64_t enumeration_cap = kDefaultEnumerationCap);

/// Ising KL(p || q) by a straightforward enumeration with log-sum-exp partition functions.
/// `edges` lists the (i, j) spin pairs, `coupling` their J^p values and `mask` the kept edges.
double ising_kl_enumeration(std::size_t n_spins, std::span<const std::pair<std::size_t, std::size_t>> edges,
                            std::span<const double> coupling, std::span<const int> mask);

// ---------------------------------------------------------------------------------------
// Verification suites shared by the `oracle` subcommand and the acceptance binary.

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double worst = 0.0;  // largest discrepancy seen, where that makes sense
};

/// Random spaces of 1-3 complete/path sub-graphs with 2-4 vertices and beta in [0, 2]:
/// factor-product Gram over all vertex pairs against the dense product-Laplacian kernel.
SuiteResult kronecker_suite(std::size_t n_spaces, std::uint64_t seed, double tol);

/// BFS distance equals Hamming on every all-complete product up to 3x3x3 and is at
/// least Hamming when a path sub-graph is present (all pairs).
SuiteResult shortest_path_suite();

/// Fast GP (prediction over every vertex and NLL) against dense_gp on random instances.
SuiteResult gp_suite(std::size_t n_instances, std::uint64_t seed, double tol);

/// Exhaustive minimum of the 51 x 51 Branin grid.
SuiteResult branin_grid_suite();

/// Brute-force optimum of synthetic 10-variable instances (seeds first_seed, ...).
SuiteResult wmaxsat_suite(std::size_t n_instances, std::uint64_t first_seed);

std::vector<SuiteResult> run_all_suites();

}  // namespace combo::oracle
