#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "combo/acquisition.hpp"
#include "combo/benchmarks.hpp"
#include "combo/inference.hpp"

namespace combo {

inline constexpr const char* kVersion = "0.1.0";

enum class Optimizer { kCombo, kRandomSearch, kSimulatedAnnealing };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);

struct AnnealingConfig {
  double initial_temperature = 1.0;
  /// Temperature multiplier applied after every evaluation.
  double cooling = 0.95;
};

struct RunConfig {
  std::string benchmark = "branin";
  nlohmann::json benchmark_config = nlohmann::json::object();
  std::size_t budget = 100;
  std::size_t n_init = 20;
  std::optional<std::uint64_t> seed;
  Optimizer optimizer = Optimizer::kCombo;
  AcquisitionConfig acquisition;
  PriorConfig priors;
  SamplerConfig sampler;
  AnnealingConfig annealing;
  std::string out;
  /// Write elapsed seconds into traces. Off by default so traces are byte-reproducible.
  bool record_wall_clock = false;

  /// Throws ConfigError: seed missing, n_init >= budget, bad nested settings.
  // the benchmark id is only checked when the run builds its own benchmark by name
  void validate(bool check_benchmark_id = true) const;
};

/// Parses a config object; unknown keys at any level raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

struct TraceRecord {
  std::size_t iteration = 0;
  Vertex vertex;
  double value = 0.0;
  double best_so_far = 0.0;
  double seconds = 0.0;
  /// Median sampled beta per variable for model-chosen points; empty otherwise.
  std::vector<double> beta_medians;
};

struct Trace {
  std::string benchmark;
  Optimizer optimizer = Optimizer::kCombo;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  /// The search space ran out of unevaluated vertices before the budget.
  bool exhausted = false;

  [[nodiscard]] double final_best() const;
};

/// Called after every evaluation; lets callers stream progress.
using TraceObserver = std::function<void(const TraceRecord&)>;

Trace run_combo(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer = {});
Trace run_random_search(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer = {});
Trace run_simulated_annealing(const RunConfig& cfg, const Benchmark& benchmark,
                              const TraceObserver& observer = {});

/// Builds the benchmark from cfg and dispatches on cfg.optimizer.
Trace run(const RunConfig& cfg, const TraceObserver& observer = {});
Trace run(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer = {});

/// Metropolis acceptance probability of a move that changes the objective by `delta`
/// (minimization): 1 for delta <= 0, exp(-delta / T) otherwise, 0 at T = 0.
double metropolis_acceptance(double delta, double temperature);

/// Uniform distinct vertices; fewer than n when the space is smaller.
std::vector<Vertex> initial_design(const SearchSpace& space, std::size_t n, Rng& rng);

/// Per-variable medians of the sampled betas.
std::vector<double> beta_medians(std::span<const GpParams> samples);

inline const std::vector<std::string> kTraceColumns{"iteration", "vertex",  "value",
                                                    "best_so_far", "seconds", "beta_medians"};

void write_trace_csv(const Trace& trace, std::ostream& out);
/// CSV at `path` plus `<path>.meta.json` with the config, version and instance description.
void write_trace(const std::string& path, const Trace& trace, const RunConfig& cfg, const Benchmark& benchmark);
/// Reads a CSV written by write_trace together with its sidecar.
Trace read_trace(const std::string& path);

struct SummaryRow {
  Optimizer optimizer = Optimizer::kCombo;
  std::size_t runs = 0;
  double mean_final = 0.0;
  /// Sample standard deviation over sqrt(runs); 0 for a single run.
  double stderr_final = 0.0;
  /// Mean best-so-far per iteration; shorter traces carry their last value forward.
  std::vector<double> curve;
};

struct Summary {
  std::string benchmark;
  std::vector<SummaryRow> rows;  // one per optimizer, in first-seen order
};

/// Throws ConfigError for an empty list or traces from different benchmarks.
Summary emit_summary(std::span<const Trace> traces);

/// Table "benchmark,optimizer,runs,mean_final,stderr_final".
void write_summary_table(const Summary& summary, std::ostream& out);
/// Plot data "iteration,<optimizer>..." with one column per optimizer.
void write_summary_curves(const Summary& summary, std::ostream& out);

}  // namespace combo
