// combo: run optimizers on the benchmark suite, summarize traces, run oracle checks.

#include <glob.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "combo/errors.hpp"
#include "combo/harness.hpp"
#include "combo/oracle.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::string> benchmark;
  std::optional<std::string> optimizer;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> n_init;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

int do_run(const RunFlags& f) {
  combo::RunConfig cfg = f.config.empty() ? combo::RunConfig{} : combo::load_run_config(f.config);
  if (f.benchmark) cfg.benchmark = *f.benchmark;
  if (f.optimizer) cfg.optimizer = combo::optimizer_from_string(*f.optimizer);
  if (f.budget) cfg.budget = *f.budget;
  if (f.n_init) cfg.n_init = *f.n_init;
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  cfg.validate();

  const auto bm = combo::make_benchmark(cfg.benchmark, cfg.benchmark_config,
                                        combo::derive_seed(*cfg.seed, combo::Stream::kBenchmark));
  spdlog::info("{} on {} ({} variables), budget {}, seed {}", combo::to_string(cfg.optimizer), bm->id(),
               bm->space().num_variables(), cfg.budget, *cfg.seed);
  const combo::TraceObserver progress = [&](const combo::TraceRecord& r) {
    if (!f.quiet) spdlog::info("[{:>4}] value {:.6g} best {:.6g}", r.iteration, r.value, r.best_so_far);
  };
  const combo::Trace trace = combo::run(cfg, *bm, progress);
  if (trace.exhausted) spdlog::warn("search space exhausted after {} evaluations", trace.records.size());

  if (cfg.out.empty()) {
    combo::write_trace_csv(trace, std::cout);
  } else {
    combo::write_trace(cfg.out, trace, cfg, *bm);
    spdlog::info("trace written to {} (final best {:.10g})", cfg.out, trace.final_best());
  }
  return 0;
}

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> paths;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw combo::ConfigError("cannot expand '" + p + "'");
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  // sidecars match broad patterns too
  std::erase_if(paths, [](const std::string& s) { return s.ends_with(".meta.json"); });
  return paths;
}

int do_summarize(const std::vector<std::string>& patterns, const std::string& out) {
  const auto paths = expand(patterns);
  if (paths.empty()) throw combo::ConfigError("no trace files match");
  std::vector<combo::Trace> traces;
  for (const auto& p : paths) traces.push_back(combo::read_trace(p));
  const auto summary = combo::emit_summary(traces);
  if (out.empty()) {
    combo::write_summary_table(summary, std::cout);
    return 0;
  }
  std::ofstream table(out);
  combo::write_summary_table(summary, table);
  const std::string curve_path = out + ".curve.csv";
  std::ofstream curves(curve_path);
  combo::write_summary_curves(summary, curves);
  if (!table || !curves) throw combo::Error("cannot write " + out);
  spdlog::info("{} traces summarized into {} and {}", traces.size(), out, curve_path);
  return 0;
}

int do_oracle() {
  bool ok = true;
  for (const auto& r : combo::oracle::run_all_suites()) {
    std::printf("%-14s %s  %s\n", r.name.c_str(), r.passed ? "ok  " : "FAIL", r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization over combinatorial graphs"};
  app.set_version_flag("--version", std::string(combo::kVersion));
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "run one optimizer on one benchmark and write a trace");
  run->add_option("--config", rf.config, "JSON config file (CLI flags override it)")->check(CLI::ExistingFile);
  run->add_option("--benchmark", rf.benchmark, "contamination | ising | pest | branin | wmaxsat");
  run->add_option("--optimizer", rf.optimizer, "combo | random-search | simulated-annealing");
  run->add_option("--budget", rf.budget, "total evaluations");
  run->add_option("--n-init", rf.n_init, "random initial evaluations");
  run->add_option("--seed", rf.seed, "master seed");
  run->add_option("--out", rf.out, "trace CSV path (stdout when omitted)");
  run->add_flag("--quiet", rf.quiet, "no per-evaluation log lines");

  std::vector<std::string> inputs;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "mean and standard error of final best across traces");
  summarize->add_option("--in", inputs, "trace CSV glob(s)")->required();
  summarize->add_option("--out", summary_out, "summary CSV; curves go to <out>.curve.csv");

  auto* oracle = app.add_subcommand("oracle", "brute-force verification suites on small spaces");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("combo"));
  spdlog::set_pattern("%H:%M:%S %^%l%$ %v");

  try {
    if (*run) return do_run(rf);
    if (*summarize) return do_summarize(inputs, summary_out);
    if (*oracle) return do_oracle();
  } catch (const combo::Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
