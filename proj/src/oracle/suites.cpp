#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "combo/benchmarks.hpp"
#include "combo/kernel.hpp"
#include "combo/oracle.hpp"
#include "combo/wcnf.hpp"

namespace combo::oracle {

namespace {

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

std::vector<Vertex> every_vertex(const SearchSpace& s) {
  std::vector<Vertex> out;
  out.reserve(s.total_size());
  for (std::uint64_t r = 0; r < s.total_size(); ++r) out.push_back(s.unrank(r));
  return out;
}

SearchSpace random_small_space(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> count(1, 3);
  std::uniform_int_distribution<std::size_t> size(2, 4);
  std::bernoulli_distribution is_path(0.5);
  std::vector<SubGraph> graphs;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = size(rng);
    graphs.push_back(is_path(rng) ? SubGraph::path(k) : SubGraph::complete(k));
  }
  return SearchSpace(std::move(graphs));
}

}  // namespace

SuiteResult kronecker_suite(std::size_t n_spaces, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> beta(0.0, 2.0);
  SuiteResult res{"kronecker", true, "", 0.0};
  for (std::size_t t = 0; t < n_spaces; ++t) {
    const SearchSpace s = random_small_space(rng);
    std::vector<double> betas(s.num_variables());
    for (double& b : betas) b = beta(rng);
    const auto vs = every_vertex(s);
    const Eigen::MatrixXd fast = gram(kernel_factors(s, betas), vs, vs, 1.0);
    const Eigen::MatrixXd dense = dense_diffusion_kernel(s, betas);
    res.worst = std::max(res.worst, (fast - dense).cwiseAbs().maxCoeff());
  }
  res.passed = res.worst <= tol;
  res.detail = format("%.0f spaces, max abs difference %.3g", static_cast<double>(n_spaces), res.worst);
  return res;
}

SuiteResult shortest_path_suite() {
  SuiteResult res{"shortest-path", true, "", 0.0};
  std::size_t pairs = 0;
  std::size_t violations = 0;
  for (std::size_t a = 1; a <= 3; ++a) {
    for (std::size_t b = 1; b <= 3; ++b) {
      for (std::size_t c = 1; c <= 3; ++c) {
        for (int with_path = 0; with_path < 2; ++with_path) {
          const SearchSpace s({SubGraph::complete(a), with_path ? SubGraph::path(b) : SubGraph::complete(b),
                               SubGraph::complete(c)});
          const auto dist = all_pairs_shortest_paths(s);
          for (std::uint64_t i = 0; i < s.total_size(); ++i) {
            const Vertex u = s.unrank(i);
            for (std::uint64_t j = 0; j < s.total_size(); ++j) {
              const auto h = hamming_distance(u, s.unrank(j));
              const auto d = dist[i][j];
              ++pairs;
              if (with_path ? d < h : d != h) ++violations;
            }
          }
        }
      }
    }
  }
  res.passed = violations == 0;
  res.worst = static_cast<double>(violations);
  res.detail = format("%.0f pairs checked, %.0f violations", static_cast<double>(pairs), res.worst);
  return res;
}

SuiteResult gp_suite(std::size_t n_instances, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> n_points(1, 12);
  SuiteResult res{"gp-dense", true, "", 0.0};
  for (std::size_t t = 0; t < n_instances; ++t) {
    const SearchSpace s = random_small_space(rng);
    Dataset d;
    const std::size_t n = n_points(rng);
    for (std::size_t i = 0; i < n; ++i) d.add(s.uniform_vertex(rng), normal(rng));
    GpParams p;
    p.mean = normal(rng);
    p.signal_variance = 0.5 + 1.5 * unit(rng);
    p.noise_variance = 0.01 + 0.49 * unit(rng);
    for (std::size_t i = 0; i < s.num_variables(); ++i) p.betas.push_back(2.0 * unit(rng));

    const auto vs = every_vertex(s);
    const auto ref = dense_gp(s, d, p, vs);
    const GpPosterior post(s, d, p);
    std::vector<PredictiveDistribution> out(vs.size());
    post.predict(vs, out);
    for (std::size_t q = 0; q < vs.size(); ++q) {
      res.worst = std::max(res.worst, std::abs(out[q].mean - ref.predictions[q].mean));
      res.worst = std::max(res.worst, std::abs(out[q].variance - std::max(0.0, ref.predictions[q].variance)));
    }
    res.worst = std::max(res.worst, std::abs(neg_log_marginal_likelihood(d, p, post.factors()) - ref.nll));
  }
  res.passed = res.worst <= tol;
  res.detail = format("%.0f instances, max abs difference %.3g", static_cast<double>(n_instances), res.worst);
  return res;
}

SuiteResult branin_grid_suite() {
  const BraninDiscrete b;
  const auto [arg, value] = brute_force_minimum(b.space(), [&](const Vertex& v) { return b(v); });
  SuiteResult res{"branin-grid", value >= kBraninGlobalMinimum, "", value};
  char buf[160];
  std::snprintf(buf, sizeof buf, "grid minimum %.15g at (%u, %u); continuous minimum %.15g", value, arg[0], arg[1],
                kBraninGlobalMinimum);
  res.detail = buf;
  return res;
}

SuiteResult wmaxsat_suite(std::size_t n_instances, std::uint64_t first_seed) {
  SuiteResult res{"wmaxsat", true, "optima:", 0.0};
  for (std::size_t k = 0; k < n_instances; ++k) {
    const auto inst = random_wcnf(10, 40, 3, 10, first_seed + k);
    const SearchSpace s(std::vector<SubGraph>(10, SubGraph::complete(2)));
    const auto [arg, value] = brute_force_minimum(s, [&](const Vertex& x) { return wmaxsat_objective(x, inst); });
    double bound = 0.0;
    for (double w : inst.normalized_weights) bound += std::abs(w);
    if (std::abs(value) > bound) res.passed = false;
    res.detail += format(" %.10g", value);
  }
  return res;
}

std::vector<SuiteResult> run_all_suites() {
  return {kronecker_suite(50, 1, 1e-8), shortest_path_suite(), gp_suite(100, 2, 1e-8), branin_grid_suite(),
          wmaxsat_suite(5, 0)};
}

}  // namespace combo::oracle
