// Acceptance suite. Usage: acceptance <1..10 | all>. Prints one PASS/FAIL line per criterion
// and exits non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "combo/errors.hpp"
#include "combo/harness.hpp"
#include "combo/oracle.hpp"

using namespace combo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig config_for(const std::string& benchmark, nlohmann::json options, Optimizer opt, std::size_t budget,
                     std::uint64_t seed) {
  RunConfig cfg;
  cfg.benchmark = benchmark;
  cfg.benchmark_config = std::move(options);
  cfg.optimizer = opt;
  cfg.budget = budget;
  cfg.n_init = 20;
  cfg.seed = seed;
  return cfg;
}

// --- 1..4: structural and statistical checks ------------------------------------------

Outcome check_kronecker() {
  const auto t0 = Clock::now();
  const auto r = oracle::kronecker_suite(50, 20240, 1e-8);
  const double s = seconds_since(t0);
  return {r.passed && s < 10.0, r.detail + fmt(", %.2f s (limit 10 s)", s)};
}

Outcome check_shortest_paths() {
  const auto t0 = Clock::now();
  const auto r = oracle::shortest_path_suite();
  const double s = seconds_since(t0);
  return {r.passed && s < 5.0, r.detail + fmt(", %.2f s (limit 5 s)", s)};
}

Outcome check_gp_oracle() {
  const auto t0 = Clock::now();
  const auto r = oracle::gp_suite(100, 777, 1e-8);
  const double s = seconds_since(t0);
  return {r.passed && s < 10.0, r.detail + fmt(", %.2f s (limit 10 s)", s)};
}

Outcome check_sampler_statistics() {
  const auto t0 = Clock::now();
  const double lo = -1.0;
  const double hi = 2.0;
  const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  Rng rng(derive_seed(4, Stream::kSampler));
  std::vector<double> xs;
  double x = 0.0;
  for (int i = 0; i < 5000; ++i) {
    x = slice_sample_univariate([&](double t) { return (t < lo || t > hi) ? -INFINITY : -0.5 * t * t; }, x, rng);
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  const double z = cdf(hi) - cdf(lo);
  double ks = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = (cdf(xs[i]) - cdf(lo)) / z;
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }

  // x = tau sqrt(2 / (e^k - 1)) makes log(1 + 2 tau^2 / x^2) = k, so the density is K k
  const double tau = 5.0;
  double worst = 0.0;
  int points = 0;
  std::vector<double> ks_values{std::log(2.0)};
  for (int j = 1; j < 20; ++j) ks_values.push_back(0.1 * j);
  for (double k : ks_values) {
    const double xk = tau * std::sqrt(2.0 / std::expm1(k));
    worst = std::max(worst, std::abs(std::exp(log_prior_horseshoe(xk, tau)) - kHorseshoeConstant * k));
    ++points;
  }
  const double s = seconds_since(t0);
  const bool pass = ks < 0.05 && worst <= 1e-12 && points == 20 && s < 30.0;
  return {pass, fmt("KS distance %.4f (limit 0.05) over 5000 transitions; horseshoe max error %.2e at %d points; "
                    "%.2f s",
                    ks, worst, points, s)};
}

// --- 5..8: optimization outcomes ------------------------------------------------------

Outcome check_branin() {
  const auto t0 = Clock::now();
  const auto grid = oracle::branin_grid_suite();
  const double grid_min = grid.worst;
  int hits = 0;
  std::string finals;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Trace t = run(config_for("branin", nlohmann::json::object(), Optimizer::kCombo, 100, seed));
    if (t.final_best() - grid_min <= 0.05) ++hits;
    finals += fmt(" %.4f", t.final_best());
  }
  return {hits >= 7, fmt("grid optimum %.6f; %d/10 seeds within 0.05 (need 7); finals:", grid_min, hits) + finals +
                         fmt("; %.0f s", seconds_since(t0))};
}

struct Paired {
  std::vector<double> combo;
  std::vector<double> random;
};

Paired paired_runs(const std::string& benchmark, const nlohmann::json& options, std::size_t budget, int seeds) {
  Paired p;
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    p.combo.push_back(run(config_for(benchmark, options, Optimizer::kCombo, budget, seed)).final_best());
    p.random.push_back(run(config_for(benchmark, options, Optimizer::kRandomSearch, budget, seed)).final_best());
    std::fprintf(stderr, "  %s seed %d: combo %.6f random %.6f\n", benchmark.c_str(), s, p.combo.back(),
                 p.random.back());
  }
  return p;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Outcome check_contamination() {
  const auto t0 = Clock::now();
  const auto p = paired_runs("contamination", nlohmann::json{{"lambda", 0.0}}, 270, 5);
  int wins = 0;
  for (std::size_t i = 0; i < p.combo.size(); ++i) wins += p.combo[i] < p.random[i];
  const double m = mean(p.combo);
  return {m <= 21.6 && wins == 5,
          fmt("COMBO mean final %.4f (limit 21.6), random search mean %.4f; COMBO better on %d/5 paired seeds "
              "(need 5); %.0f s",
              m, mean(p.random), wins, seconds_since(t0))};
}

Outcome check_ising() {
  const auto t0 = Clock::now();
  IsingConfig cfg;
  cfg.lambda = 1e-2;
  cfg.seed = 99;
  const Ising model(cfg);
  const double all_ones = model(Vertex(std::vector<Vertex::value_type>(24, 1)));

  Rng rng(derive_seed(7, Stream::kBenchmark));
  double worst = 0.0;
  const auto space = model.space();
  for (int t = 0; t < 20; ++t) {
    const Vertex x = space.uniform_vertex(rng);
    const std::vector<int> mask(x.begin(), x.end());
    worst = std::max(worst, std::abs(model.kl_divergence(x) -
                                     oracle::ising_kl_enumeration(16, model.edges(), model.couplings(), mask)));
  }

  const auto p = paired_runs("ising", nlohmann::json{{"lambda", 1e-2}}, 170, 5);
  int wins = 0;
  for (std::size_t i = 0; i < p.combo.size(); ++i) wins += p.combo[i] < p.random[i];
  const bool pass = all_ones == 0.24 && worst <= 1e-8 && wins >= 4;
  return {pass, fmt("all-ones objective %.17g (expect 0.24); KL oracle max error %.2e on 20 masks; COMBO mean %.4f, "
                    "random mean %.4f, COMBO better on %d/5 paired seeds (need 4); %.0f s",
                    all_ones, worst, mean(p.combo), mean(p.random), wins, seconds_since(t0))};
}

Outcome check_wmaxsat() {
  const auto t0 = Clock::now();
  // parser corpus
  int rejected = 0;
  int files = 0;
  {
    const std::string dir = COMBO_TEST_DATA "/wcnf/";
    std::ifstream manifest(dir + "expected_lines.txt");
    std::string name;
    std::size_t line = 0;
    while (manifest >> name >> line) {
      ++files;
      try {
        read_wcnf(dir + name);
      } catch (const ParseError& e) {
        rejected += e.line() == line;
      }
    }
  }

  bool all_instances = true;
  std::string per_instance;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const nlohmann::json opts{{"synthetic", true}, {"seed", 1000 + k}};
    const auto bm = make_benchmark("wmaxsat", opts, 0);
    const auto [arg, optimum] =
        oracle::brute_force_minimum(bm->space(), [&](const Vertex& v) { return bm->evaluate(v); });
    int found = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Trace t = run(config_for("wmaxsat", opts, Optimizer::kCombo, 100, seed), *bm);
      found += t.final_best() <= optimum;
    }
    all_instances = all_instances && found >= 8;
    per_instance += fmt(" %d/10", found);
  }
  return {all_instances && rejected == 10 && files == 10,
          fmt("malformed corpus: %d/%d rejected at the right line; optimum found per instance:", rejected, files) +
              per_instance + fmt(" (need 8 each); %.0f s", seconds_since(t0))};
}

// --- 9, 10: scalability and sparsity --------------------------------------------------

Outcome check_scalability() {
  const SearchSpace space(std::vector<SubGraph>(60, SubGraph::complete(2)));
  std::vector<double> betas(60);
  Rng rng(derive_seed(9, Stream::kAcquisition));
  for (double& b : betas) b = 2.0 * uniform01(rng);
  auto t0 = Clock::now();
  const auto kf = kernel_factors(space, betas);
  const double factor_s = seconds_since(t0);

  Dataset data;
  Rng design(derive_seed(9, Stream::kInitialDesign));
  for (const auto& v : initial_design(space, 100, design)) {
    double f = 0.0;
    for (std::size_t i = 0; i < 60; ++i) f += (i % 3 == 0 ? 1.0 : -0.5) * v[i] + (i < 10 ? 0.3 * v[i] * v[i + 1] : 0.0);
    data.add(v, f);
  }
  t0 = Clock::now();
  SamplerState state = make_sampler_state(derive_seed(9, Stream::kSampler));
  const auto samples = fit_surrogate(data, state, PriorConfig{}, space);
  const double fit_s = seconds_since(t0);
  const auto t1 = Clock::now();
  Rng acq(derive_seed(9, Stream::kAcquisition));
  const Vertex next = next_vertex(data, samples, space, AcquisitionConfig{}, acq);
  const double acq_s = seconds_since(t1);
  const double iteration_s = fit_s + acq_s;
  const bool pass = factor_s < 1.0 && iteration_s < 300.0 && next.size() == 60 && kf.factors.size() == 60;
  return {pass, fmt("factors %.4f s (limit 1 s); first iteration %.1f s = fit with burn-in %.1f s + acquisition "
                    "%.1f s (limit 300 s)",
                    factor_s, iteration_s, fit_s, acq_s)};
}

Outcome check_sparsity() {
  const auto t0 = Clock::now();
  const FunctionBenchmark bm("sparse10", SearchSpace(std::vector<SubGraph>(10, SubGraph::complete(2))),
                             [](const Vertex& v) {
                               return 2.0 * v[1] - 1.5 * v[4] + 1.0 * v[7] - 1.2 * v[1] * v[7];
                             });
  const std::vector<std::size_t> active{1, 4, 7};
  int good = 0;
  std::string rows;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunConfig cfg = config_for("sparse10", nlohmann::json::object(), Optimizer::kCombo, 100, seed);
    const Trace t = run(cfg, bm);
    // the last model-driven record holds the medians of the final fit
    std::vector<double> med;
    for (const auto& r : t.records) {
      if (!r.beta_medians.empty()) med = r.beta_medians;
    }
    if (med.size() != 10) continue;
    bool ok = true;
    for (std::size_t a : active) {
      int beaten = 0;
      for (std::size_t j = 0; j < 10; ++j) {
        if (std::find(active.begin(), active.end(), j) == active.end() && med[a] > med[j]) ++beaten;
      }
      ok = ok && beaten >= 5;
    }
    good += ok;
    double act = 0.0;
    double inact = 0.0;
    for (std::size_t j = 0; j < 10; ++j) {
      (std::find(active.begin(), active.end(), j) != active.end() ? act : inact) += med[j];
    }
    rows += fmt(" [%.2f|%.2f]", act / 3.0, inact / 7.0);
  }
  return {good >= 8, fmt("%d/10 seeds with every active beta above at least 5 inactive (need 8); mean median beta "
                         "[active|inactive] per seed:",
                         good) +
                         rows + fmt("; %.0f s", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Kronecker factor kernel equals dense product-Laplacian kernel", check_kronecker},
      {"shortest paths equal Hamming on complete products", check_shortest_paths},
      {"GP predictions and likelihood equal the dense oracle", check_gp_oracle},
      {"slice sampler KS test and horseshoe closed forms", check_sampler_statistics},
      {"discretized Branin", check_branin},
      {"contamination control", check_contamination},
      {"Ising sparsification", check_ising},
      {"weighted MaxSAT small instances and parser corpus", check_wmaxsat},
      {"scalability on 60 binary variables", check_scalability},
      {"sparsity of the diffusion scales", check_sparsity},
  };
  const std::string which = argc > 1 ? argv[1] : "all";
  std::vector<std::size_t> selected;
  if (which == "all") {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  } else {
    const int k = std::atoi(which.c_str());
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s <1..%zu | all>\n", argv[0], criteria.size());
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k - 1));
  }

  bool all_pass = true;
  for (std::size_t i : selected) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
