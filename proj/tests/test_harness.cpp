#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "combo/errors.hpp"
#include "combo/harness.hpp"

using namespace combo;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "combo_harness_test";
  std::filesystem::create_directories(dir);
  return dir;
}

RunConfig small_config(Optimizer opt, std::size_t budget, std::size_t n_init, std::uint64_t seed) {
  RunConfig cfg;
  cfg.optimizer = opt;
  cfg.budget = budget;
  cfg.n_init = n_init;
  cfg.seed = seed;
  cfg.sampler.burn_in_sweeps = 10;
  cfg.acquisition.n_random_candidates = 200;
  return cfg;
}

FunctionBenchmark k2k2() {
  return FunctionBenchmark("k2k2", SearchSpace({SubGraph::complete(2), SubGraph::complete(2)}),
                           [](const Vertex& v) { return v == Vertex{1, 0} ? -3.0 : 1.0 * v[0] + 2.0 * v[1]; });
}

FunctionBenchmark quadratic() {
  return FunctionBenchmark("quad", SearchSpace({SubGraph::path(6), SubGraph::path(6), SubGraph::complete(3)}),
                           [](const Vertex& v) {
                             return std::pow(v[0] - 2.0, 2) + std::pow(v[1] - 4.0, 2) + (v[2] == 1 ? 0.0 : 0.5);
                           });
}

void check_trace_invariants(const Trace& t) {
  std::set<Vertex> seen;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    CHECK(r.iteration == i + 1);
    CHECK(seen.insert(r.vertex).second);
    if (i > 0) CHECK(r.best_so_far <= t.records[i - 1].best_so_far);
    CHECK(r.best_so_far <= r.value);
  }
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and validates") {
  const auto j = nlohmann::json::parse(R"({"benchmark": "ising", "budget": 30, "n_init": 5, "seed": 7,
      "optimizer": "random-search", "acquisition": {"n_spray": 10, "reduction": "max"},
      "sampler": {"burn_in_sweeps": 3}, "benchmark_config": {"lambda": 0.01}})");
  const auto cfg = run_config_from_json(j);
  CHECK(cfg.benchmark == "ising");
  CHECK(cfg.budget == 30);
  CHECK(cfg.seed == 7);
  CHECK(cfg.optimizer == Optimizer::kRandomSearch);
  CHECK(cfg.acquisition.n_spray == 10);
  CHECK(cfg.acquisition.reduction == AcquisitionConfig::Reduction::kMax);
  CHECK(cfg.sampler.burn_in_sweeps == 3);
  CHECK(run_config_from_json(to_json(cfg)).budget == 30);
  CHECK(to_json(run_config_from_json(to_json(cfg))) == to_json(cfg));

  CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"budgett", 3}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"sampler", {{"burnin", 3}}}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"optimizer", "bocs"}}), ConfigError);
  RunConfig bad;
  CHECK_THROWS_AS(bad.validate(), ConfigError);  // no seed
  bad.seed = 1;
  bad.n_init = bad.budget;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("budget n_init + 1 makes exactly one model-driven evaluation") {
  const auto bm = quadratic();
  const auto cfg = small_config(Optimizer::kCombo, 6, 5, 3);
  const Trace t = run_combo(cfg, bm);
  REQUIRE(t.records.size() == 6);
  for (std::size_t i = 0; i < 5; ++i) CHECK(t.records[i].beta_medians.empty());
  CHECK(t.records[5].beta_medians.size() == 3);
  check_trace_invariants(t);
}

TEST_CASE("K2 x K2 with budget 4 evaluates every vertex and finds the optimum") {
  const auto bm = k2k2();
  for (auto opt : {Optimizer::kCombo, Optimizer::kRandomSearch, Optimizer::kSimulatedAnnealing}) {
    CAPTURE(to_string(opt));
    const Trace t = run(small_config(opt, 4, 2, 11), bm);
    if (opt == Optimizer::kSimulatedAnnealing) {
      // a single chain may revisit; it still reports a sane trace
      CHECK(t.records.size() <= 4);
      continue;
    }
    REQUIRE(t.records.size() == 4);
    check_trace_invariants(t);
    CHECK(t.final_best() == -3.0);
    CHECK_FALSE(t.exhausted);
  }
}

TEST_CASE("random search stops early with a flag when the space runs out") {
  const auto bm = k2k2();
  const Trace t = run_random_search(small_config(Optimizer::kRandomSearch, 10, 2, 1), bm);
  CHECK(t.records.size() == 4);
  CHECK(t.exhausted);
  const Trace c = run_combo(small_config(Optimizer::kCombo, 10, 2, 1), bm);
  CHECK(c.records.size() == 4);
  CHECK(c.exhausted);
  CHECK(c.final_best() == -3.0);
}

TEST_CASE("same config gives byte-identical trace files") {
  const auto bm = quadratic();
  const auto dir = scratch_dir();
  for (auto opt : {Optimizer::kCombo, Optimizer::kRandomSearch, Optimizer::kSimulatedAnnealing}) {
    const auto cfg = small_config(opt, 14, 6, 42);
    const auto a = (dir / ("a_" + to_string(opt) + ".csv")).string();
    const auto b = (dir / ("b_" + to_string(opt) + ".csv")).string();
    write_trace(a, run(cfg, bm), cfg, bm);
    write_trace(b, run(cfg, bm), cfg, bm);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a + ".meta.json") == slurp(b + ".meta.json"));
    const auto other = small_config(opt, 14, 6, 43);
    std::ostringstream x;
    std::ostringstream y;
    write_trace_csv(run(cfg, bm), x);
    write_trace_csv(run(other, bm), y);
    CHECK(x.str() != y.str());
  }
}

TEST_CASE("trace CSV layout and round trip") {
  const auto bm = quadratic();
  const auto cfg = small_config(Optimizer::kCombo, 8, 6, 5);
  const Trace t = run(cfg, bm);
  std::ostringstream out;
  write_trace_csv(t, out);
  const std::string csv = out.str();
  CHECK(csv.rfind("iteration,vertex,value,best_so_far,seconds,beta_medians\n", 0) == 0);
  const auto path = (scratch_dir() / "rt.csv").string();
  write_trace(path, t, cfg, bm);
  const Trace back = read_trace(path);
  CHECK(back.benchmark == "quad");
  CHECK(back.optimizer == Optimizer::kCombo);
  CHECK(back.seed == 5);
  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(back.records[i].vertex == t.records[i].vertex);
    CHECK(back.records[i].value == t.records[i].value);
    CHECK(back.records[i].best_so_far == t.records[i].best_so_far);
    CHECK(back.records[i].beta_medians == t.records[i].beta_medians);
  }
  const auto meta = nlohmann::json::parse(slurp(path + ".meta.json"));
  CHECK(meta.at("version") == kVersion);
  CHECK(meta.at("config").at("budget") == 8);
}

TEST_CASE("random search and annealing keep the trace invariants") {
  const auto bm = quadratic();
  const Trace r = run_random_search(small_config(Optimizer::kRandomSearch, 40, 10, 9), bm);
  CHECK(r.records.size() == 40);
  check_trace_invariants(r);
  const Trace s = run_simulated_annealing(small_config(Optimizer::kSimulatedAnnealing, 40, 10, 9), bm);
  CHECK(s.records.size() == 40);
  for (std::size_t i = 1; i < s.records.size(); ++i) CHECK(s.records[i].best_so_far <= s.records[i - 1].best_so_far);
  // all three share the initial design
  const Trace c = run_combo(small_config(Optimizer::kCombo, 11, 10, 9), bm);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(r.records[i].vertex == c.records[i].vertex);
    CHECK(s.records[i].vertex == c.records[i].vertex);
  }
}

TEST_CASE("metropolis rule") {
  CHECK(metropolis_acceptance(-1.0, 1.0) == 1.0);
  CHECK(metropolis_acceptance(0.0, 0.0) == 1.0);
  CHECK(metropolis_acceptance(-5.0, 0.0) == 1.0);
  CHECK(metropolis_acceptance(1.0, 0.0) == 0.0);
  CHECK(metropolis_acceptance(1.0, 1e-300) == 0.0);
  CHECK(metropolis_acceptance(2.0, 4.0) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("annealing at zero temperature never accepts a worse point") {
  const auto bm = quadratic();
  auto cfg = small_config(Optimizer::kSimulatedAnnealing, 40, 5, 2);
  cfg.annealing.initial_temperature = 0.0;
  const Trace t = run_simulated_annealing(cfg, bm);
  // the chain position is the best point so far, so every proposal that is not an
  // improvement leaves best_so_far unchanged and the walk never drifts uphill
  double current = t.records[4].best_so_far;
  for (std::size_t i = 5; i < t.records.size(); ++i) {
    if (t.records[i].value < current) current = t.records[i].value;
    CHECK(t.records[i].best_so_far == current);
  }
}

TEST_CASE("initial design is distinct and seeded") {
  const SearchSpace s({SubGraph::complete(3), SubGraph::complete(3)});
  Rng a(1);
  Rng b(1);
  const auto x = initial_design(s, 5, a);
  CHECK(x == initial_design(s, 5, b));
  CHECK(std::set<Vertex>(x.begin(), x.end()).size() == 5);
  Rng c(2);
  CHECK(initial_design(s, 20, c).size() == 9);
}

TEST_CASE("summary statistics") {
  Trace a;
  a.benchmark = "branin";
  a.records = {{1, {0}, 5.0, 5.0, 0.0, {}}, {2, {1}, 1.0, 1.0, 0.0, {}}};
  Trace b = a;
  b.records = {{1, {0}, 4.0, 4.0, 0.0, {}}, {2, {1}, 3.0, 3.0, 0.0, {}}};
  const std::vector<Trace> two{a, b};
  const auto s = emit_summary(two);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].runs == 2);
  CHECK(s.rows[0].mean_final == 2.0);
  CHECK(s.rows[0].stderr_final == 1.0);
  CHECK(s.rows[0].curve == std::vector<double>{4.5, 2.0});

  const std::vector<Trace> one{a};
  CHECK(emit_summary(one).rows[0].stderr_final == 0.0);

  Trace other = a;
  other.benchmark = "ising";
  const std::vector<Trace> mixed{a, other};
  CHECK_THROWS_AS(emit_summary(mixed), ConfigError);
  CHECK_THROWS_AS(emit_summary(std::span<const Trace>{}), ConfigError);

  Trace rs = a;
  rs.optimizer = Optimizer::kRandomSearch;
  rs.records.pop_back();
  const std::vector<Trace> both{a, rs};
  const auto s2 = emit_summary(both);
  CHECK(s2.rows.size() == 2);
  CHECK(s2.rows[1].curve == std::vector<double>{5.0});
  std::ostringstream table;
  write_summary_table(s2, table);
  CHECK(table.str().rfind("benchmark,optimizer,runs,mean_final,stderr_final\n", 0) == 0);
  std::ostringstream curves;
  write_summary_curves(s2, curves);
  CHECK(curves.str().rfind("iteration,combo,random-search\n", 0) == 0);
}

TEST_CASE("evaluation errors carry the vertex") {
  const FunctionBenchmark bad("bad", SearchSpace({SubGraph::complete(3)}), [](const Vertex& v) -> double {
    if (v[0] == 2) throw std::runtime_error("boom");
    return 1.0;
  });
  bool caught = false;
  try {
    run_random_search(small_config(Optimizer::kRandomSearch, 3, 1, 1), bad);
  } catch (const EvaluationError& e) {
    caught = true;
    CHECK(e.vertex() == "2");
  }
  CHECK(caught);
}
