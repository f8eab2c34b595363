#include "combo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "combo/errors.hpp"
#include "detail/json_fields.hpp"

namespace combo {

std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::kCombo:
      return "combo";
    case Optimizer::kRandomSearch:
      return "random-search";
    case Optimizer::kSimulatedAnnealing:
      return "simulated-annealing";
  }
  return "combo";
}

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "combo") return Optimizer::kCombo;
  if (name == "random-search") return Optimizer::kRandomSearch;
  if (name == "simulated-annealing") return Optimizer::kSimulatedAnnealing;
  throw ConfigError("unknown optimizer '" + name + "' (combo, random-search, simulated-annealing)");
}

// ---------------------------------------------------------------------------------------
// Config

void RunConfig::validate(bool check_benchmark_id) const {
  if (!seed) throw ConfigError("a seed is required");
  if (budget == 0) throw ConfigError("budget must be positive");
  if (n_init == 0) throw ConfigError("n_init must be positive");
  if (n_init >= budget) throw ConfigError("n_init must be smaller than the budget");
  if (check_benchmark_id && std::find(kBenchmarkIds.begin(), kBenchmarkIds.end(), benchmark) == kBenchmarkIds.end()) {
    throw ConfigError("unknown benchmark '" + benchmark + "'");
  }
  acquisition.validate();
  if (!(priors.tau_beta > 0.0) || !(priors.tau_noise > 0.0) || !(priors.signal_variance_floor > 0.0)) {
    throw ConfigError("prior scales must be positive");
  }
  if (sampler.burn_in_sweeps < 0 || sampler.samples < 1) {
    throw ConfigError("sampler needs burn_in_sweeps >= 0 and samples >= 1");
  }
  if (!(sampler.beta_slice.width > 0.0) || sampler.beta_slice.max_doublings < 0 || sampler.beta_slice.max_shrinks < 1 ||
      !(sampler.relative_width > 0.0) || !(sampler.log_signal_width > 0.0)) {
    throw ConfigError("slice widths must be positive and limits nonnegative");
  }
  if (!(annealing.initial_temperature >= 0.0) || !(annealing.cooling > 0.0 && annealing.cooling <= 1.0)) {
    throw ConfigError("annealing needs initial_temperature >= 0 and cooling in (0, 1]");
  }
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  detail::FieldReader r(j, "config");
  r.read("benchmark", cfg.benchmark);
  if (const auto* bc = r.child("benchmark_config")) {
    if (!bc->is_object()) throw ConfigError("config.benchmark_config: expected an object");
    cfg.benchmark_config = *bc;
  }
  r.read("budget", cfg.budget);
  r.read("n_init", cfg.n_init);
  std::uint64_t seed = 0;
  if (r.read("seed", seed)) cfg.seed = seed;
  std::string optimizer;
  if (r.read("optimizer", optimizer)) cfg.optimizer = optimizer_from_string(optimizer);
  r.read("out", cfg.out);
  r.read("record_wall_clock", cfg.record_wall_clock);

  if (const auto* a = r.child("acquisition")) {
    detail::FieldReader ar(*a, "config.acquisition");
    ar.read("n_random_candidates", cfg.acquisition.n_random_candidates);
    ar.read("n_spray", cfg.acquisition.n_spray);
    ar.read("spray_radius", cfg.acquisition.spray_radius);
    ar.read("n_bfls_starts", cfg.acquisition.n_bfls_starts);
    std::string reduction;
    if (ar.read("reduction", reduction)) {
      if (reduction == "mean") {
        cfg.acquisition.reduction = AcquisitionConfig::Reduction::kMean;
      } else if (reduction == "max") {
        cfg.acquisition.reduction = AcquisitionConfig::Reduction::kMax;
      } else {
        throw ConfigError("config.acquisition.reduction: expected 'mean' or 'max'");
      }
    }
    ar.finish();
  }
  if (const auto* p = r.child("priors")) {
    detail::FieldReader pr(*p, "config.priors");
    pr.read("tau_beta", cfg.priors.tau_beta);
    pr.read("tau_noise", cfg.priors.tau_noise);
    pr.read("signal_variance_floor", cfg.priors.signal_variance_floor);
    pr.finish();
  }
  if (const auto* s = r.child("sampler")) {
    detail::FieldReader sr(*s, "config.sampler");
    sr.read("burn_in_sweeps", cfg.sampler.burn_in_sweeps);
    sr.read("samples", cfg.sampler.samples);
    sr.read("burn_in_every_call", cfg.sampler.burn_in_every_call);
    sr.read("beta_width", cfg.sampler.beta_slice.width);
    sr.read("max_doublings", cfg.sampler.beta_slice.max_doublings);
    sr.read("max_shrinks", cfg.sampler.beta_slice.max_shrinks);
    sr.read("relative_width", cfg.sampler.relative_width);
    sr.read("log_signal_width", cfg.sampler.log_signal_width);
    sr.finish();
  }
  if (const auto* a = r.child("annealing")) {
    detail::FieldReader ar(*a, "config.annealing");
    ar.read("initial_temperature", cfg.annealing.initial_temperature);
    ar.read("cooling", cfg.annealing.cooling);
    ar.finish();
  }
  r.finish();
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["benchmark"] = cfg.benchmark;
  j["benchmark_config"] = cfg.benchmark_config;
  j["budget"] = cfg.budget;
  j["n_init"] = cfg.n_init;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["optimizer"] = to_string(cfg.optimizer);
  j["out"] = cfg.out;
  j["record_wall_clock"] = cfg.record_wall_clock;
  j["acquisition"] = {
      {"n_random_candidates", cfg.acquisition.n_random_candidates},
      {"n_spray", cfg.acquisition.n_spray},
      {"spray_radius", cfg.acquisition.spray_radius},
      {"n_bfls_starts", cfg.acquisition.n_bfls_starts},
      {"reduction", cfg.acquisition.reduction == AcquisitionConfig::Reduction::kMax ? "max" : "mean"}};
  j["priors"] = {{"tau_beta", cfg.priors.tau_beta},
                 {"tau_noise", cfg.priors.tau_noise},
                 {"signal_variance_floor", cfg.priors.signal_variance_floor}};
  j["sampler"] = {{"burn_in_sweeps", cfg.sampler.burn_in_sweeps},
                  {"samples", cfg.sampler.samples},
                  {"burn_in_every_call", cfg.sampler.burn_in_every_call},
                  {"beta_width", cfg.sampler.beta_slice.width},
                  {"max_doublings", cfg.sampler.beta_slice.max_doublings},
                  {"max_shrinks", cfg.sampler.beta_slice.max_shrinks},
                  {"relative_width", cfg.sampler.relative_width},
                  {"log_signal_width", cfg.sampler.log_signal_width}};
  j["annealing"] = {{"initial_temperature", cfg.annealing.initial_temperature},
                    {"cooling", cfg.annealing.cooling}};
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

// ---------------------------------------------------------------------------------------
// Runs

double Trace::final_best() const {
  if (records.empty()) throw DomainError("trace has no records");
  return records.back().best_so_far;
}

double metropolis_acceptance(double delta, double temperature) {
  if (!(delta > 0.0)) return 1.0;
  if (!(temperature > 0.0)) return 0.0;
  return std::exp(-delta / temperature);
}

std::vector<Vertex> initial_design(const SearchSpace& space, std::size_t n, Rng& rng) {
  std::vector<Vertex> out;
  if (!space.total_size_saturated() && space.total_size() <= n) {
    // the whole space fits: take every vertex in a random order
    for (std::uint64_t r = 0; r < space.total_size(); ++r) out.push_back(space.unrank(r));
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  }
  std::unordered_set<Vertex, VertexHash> seen;
  while (out.size() < n) {
    Vertex v = space.uniform_vertex(rng);
    if (seen.insert(v).second) out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> beta_medians(std::span<const GpParams> samples) {
  if (samples.empty()) return {};
  const std::size_t d = samples.front().betas.size();
  std::vector<double> out(d);
  std::vector<double> col(samples.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t s = 0; s < samples.size(); ++s) col[s] = samples[s].betas.at(i);
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size() / 2;
    out[i] = (col.size() % 2 == 1) ? col[m] : 0.5 * (col[m - 1] + col[m]);
  }
  return out;
}

namespace {

class Recorder {
 public:
  Recorder(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer)
      : cfg_(cfg), benchmark_(benchmark), observer_(observer), start_(std::chrono::steady_clock::now()) {
    trace_.benchmark = benchmark.id();
    trace_.optimizer = cfg.optimizer;
    trace_.seed = *cfg.seed;
  }

  double evaluate(const Vertex& v, std::vector<double> betas = {}) {
    double y = 0.0;
    try {
      y = benchmark_.evaluate(v);
    } catch (const std::exception& e) {
      throw EvaluationError(v.to_string(), e.what());
    }
    if (std::isnan(y)) throw EvaluationError(v.to_string(), "objective returned NaN");
    TraceRecord rec;
    rec.iteration = trace_.records.size() + 1;
    rec.vertex = v;
    rec.value = y;
    rec.best_so_far = trace_.records.empty() ? y : std::min(trace_.records.back().best_so_far, y);
    if (cfg_.record_wall_clock) {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    rec.beta_medians = std::move(betas);
    trace_.records.push_back(rec);
    if (observer_) observer_(trace_.records.back());
    return y;
  }

  [[nodiscard]] std::size_t count() const noexcept { return trace_.records.size(); }
  void mark_exhausted() { trace_.exhausted = true; }
  Trace take() { return std::move(trace_); }

 private:
  const RunConfig& cfg_;
  const Benchmark& benchmark_;
  const TraceObserver& observer_;
  std::chrono::steady_clock::time_point start_;
  Trace trace_;
};

// Shared initial design; returns false when the space was used up.
bool run_initial_design(const RunConfig& cfg, const SearchSpace& space, Recorder& rec, Dataset& data) {
  Rng rng = make_rng(*cfg.seed, Stream::kInitialDesign);
  const auto design = initial_design(space, cfg.n_init, rng);
  for (const auto& v : design) data.add(v, rec.evaluate(v));
  return design.size() == cfg.n_init;
}

bool space_exhausted(const SearchSpace& space, std::size_t distinct) {
  return !space.total_size_saturated() && distinct >= space.total_size();
}

}  // namespace

Trace run_combo(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer) {
  cfg.validate(false);
  const SearchSpace& space = benchmark.space();
  Recorder rec(cfg, benchmark, observer);
  Dataset data;
  if (!run_initial_design(cfg, space, rec, data)) {
    if (rec.count() < cfg.budget) rec.mark_exhausted();
    return rec.take();
  }
  SamplerState state = make_sampler_state(derive_seed(*cfg.seed, Stream::kSampler));
  Rng acq_rng = make_rng(*cfg.seed, Stream::kAcquisition);
  while (rec.count() < cfg.budget) {
    if (space_exhausted(space, data.size())) {
      rec.mark_exhausted();
      break;
    }
    const auto samples = fit_surrogate(data, state, cfg.priors, space, cfg.sampler);
    Vertex next;
    try {
      next = next_vertex(data, samples, space, cfg.acquisition, acq_rng);
    } catch (const SearchSpaceExhaustedError&) {
      rec.mark_exhausted();
      break;
    }
    data.add(next, rec.evaluate(next, beta_medians(samples)));
  }
  return rec.take();
}

Trace run_random_search(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer) {
  cfg.validate(false);
  const SearchSpace& space = benchmark.space();
  Recorder rec(cfg, benchmark, observer);
  Dataset data;
  if (!run_initial_design(cfg, space, rec, data)) {
    if (rec.count() < cfg.budget) rec.mark_exhausted();
    return rec.take();
  }
  std::unordered_set<Vertex, VertexHash> seen(data.vertices.begin(), data.vertices.end());
  Rng rng = make_rng(*cfg.seed, Stream::kBaseline);
  const bool small = !space.total_size_saturated() && space.total_size() <= kDefaultEnumerationCap;
  while (rec.count() < cfg.budget) {
    if (space_exhausted(space, seen.size())) {
      rec.mark_exhausted();
      break;
    }
    Vertex v;
    if (small && seen.size() * 2 >= space.total_size()) {
      // dense regime: draw from the explicit list of free vertices
      std::vector<std::uint64_t> free;
      for (std::uint64_t r = 0; r < space.total_size(); ++r) {
        if (!seen.contains(space.unrank(r))) free.push_back(r);
      }
      v = space.unrank(free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)]);
    } else {
      do {
        v = space.uniform_vertex(rng);
      } while (seen.contains(v));
    }
    seen.insert(v);
    rec.evaluate(v);
  }
  return rec.take();
}

Trace run_simulated_annealing(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer) {
  cfg.validate(false);
  const SearchSpace& space = benchmark.space();
  Recorder rec(cfg, benchmark, observer);
  Dataset data;
  run_initial_design(cfg, space, rec, data);
  if (data.empty()) return rec.take();

  // chain starts at the best point of the shared initial design
  const auto best = std::min_element(data.values.begin(), data.values.end());
  Vertex current = data.vertices[static_cast<std::size_t>(best - data.values.begin())];
  double current_value = *best;
  double temperature = cfg.annealing.initial_temperature;
  Rng rng = make_rng(*cfg.seed, Stream::kBaseline);
  while (rec.count() < cfg.budget) {
    const auto nbrs = space.neighbors(current);
    if (nbrs.empty()) {
      rec.mark_exhausted();
      break;
    }
    const Vertex& proposal = nbrs[std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(rng)];
    const double value = rec.evaluate(proposal);
    const double u = uniform01(rng);
    if (u < metropolis_acceptance(value - current_value, temperature)) {
      current = proposal;
      current_value = value;
    }
    temperature *= cfg.annealing.cooling;
  }
  return rec.take();
}

Trace run(const RunConfig& cfg, const Benchmark& benchmark, const TraceObserver& observer) {
  switch (cfg.optimizer) {
    case Optimizer::kCombo:
      return run_combo(cfg, benchmark, observer);
    case Optimizer::kRandomSearch:
      return run_random_search(cfg, benchmark, observer);
    case Optimizer::kSimulatedAnnealing:
      return run_simulated_annealing(cfg, benchmark, observer);
  }
  throw ConfigError("unknown optimizer");
}

Trace run(const RunConfig& cfg, const TraceObserver& observer) {
  cfg.validate();
  const auto benchmark = make_benchmark(cfg.benchmark, cfg.benchmark_config, derive_seed(*cfg.seed, Stream::kBenchmark));
  return run(cfg, *benchmark, observer);
}

// ---------------------------------------------------------------------------------------
// Trace files

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) out << (c ? "," : "") << kTraceColumns[c];
  out << '\n';
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << r.vertex.to_string() << ',' << format_double(r.value) << ','
        << format_double(r.best_so_far) << ',' << format_double(r.seconds) << ',';
    for (std::size_t i = 0; i < r.beta_medians.size(); ++i) out << (i ? ";" : "") << format_double(r.beta_medians[i]);
    out << '\n';
  }
}

void write_trace(const std::string& path, const Trace& trace, const RunConfig& cfg, const Benchmark& benchmark) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trace '" + path + "'");
    write_trace_csv(trace, out);
  }
  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["benchmark"] = trace.benchmark;
  meta["optimizer"] = to_string(trace.optimizer);
  meta["seed"] = trace.seed;
  meta["exhausted"] = trace.exhausted;
  meta["config"] = to_json(cfg);
  meta["instance"] = benchmark.describe();
  std::ofstream out(path + ".meta.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write trace metadata '" + path + ".meta.json'");
  out << meta.dump(2) << '\n';
}

Trace read_trace(const std::string& path) {
  Trace trace;
  {
    std::ifstream in(path + ".meta.json");
    if (!in) throw ConfigError("missing trace metadata '" + path + ".meta.json'");
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
      trace.benchmark = meta.at("benchmark").get<std::string>();
      trace.optimizer = optimizer_from_string(meta.at("optimizer").get<std::string>());
      trace.seed = meta.at("seed").get<std::uint64_t>();
      trace.exhausted = meta.at("exhausted").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("trace metadata '" + path + ".meta.json': " + e.what());
    }
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (split(line, ',') != kTraceColumns) throw ConfigError(path + ": unexpected trace header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    const std::string where = path + ":" + std::to_string(line_no);
    if (cols.size() != kTraceColumns.size()) throw ConfigError(where + ": expected 6 columns");
    TraceRecord r;
    r.iteration = static_cast<std::size_t>(parse_double(cols[0], where));
    std::vector<Vertex::value_type> idx;
    for (const auto& t : split(cols[1], ';')) idx.push_back(static_cast<Vertex::value_type>(parse_double(t, where)));
    r.vertex = Vertex(std::move(idx));
    r.value = parse_double(cols[2], where);
    r.best_so_far = parse_double(cols[3], where);
    r.seconds = parse_double(cols[4], where);
    if (!cols[5].empty()) {
      for (const auto& t : split(cols[5], ';')) r.beta_medians.push_back(parse_double(t, where));
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

// ---------------------------------------------------------------------------------------
// Summary

Summary emit_summary(std::span<const Trace> traces) {
  if (traces.empty()) throw ConfigError("emit_summary needs at least one trace");
  Summary summary;
  summary.benchmark = traces.front().benchmark;
  std::vector<std::vector<const Trace*>> groups;
  for (const auto& t : traces) {
    if (t.benchmark != summary.benchmark) {
      throw ConfigError("cannot summarize traces from different benchmarks ('" + summary.benchmark + "' and '" +
                        t.benchmark + "')");
    }
    if (t.records.empty()) throw ConfigError("cannot summarize an empty trace");
    auto it = std::find_if(summary.rows.begin(), summary.rows.end(),
                           [&](const SummaryRow& r) { return r.optimizer == t.optimizer; });
    if (it == summary.rows.end()) {
      SummaryRow row;
      row.optimizer = t.optimizer;
      summary.rows.push_back(std::move(row));
      groups.emplace_back();
      it = summary.rows.end() - 1;
    }
    groups[static_cast<std::size_t>(it - summary.rows.begin())].push_back(&t);
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    SummaryRow& row = summary.rows[g];
    const auto& members = groups[g];
    row.runs = members.size();
    const double n = static_cast<double>(row.runs);
    double sum = 0.0;
    for (const auto* t : members) sum += t->final_best();
    row.mean_final = sum / n;
    if (row.runs > 1) {
      double ss = 0.0;
      for (const auto* t : members) ss += (t->final_best() - row.mean_final) * (t->final_best() - row.mean_final);
      row.stderr_final = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    std::size_t length = 0;
    for (const auto* t : members) length = std::max(length, t->records.size());
    row.curve.assign(length, 0.0);
    for (const auto* t : members) {
      for (std::size_t i = 0; i < length; ++i) {
        row.curve[i] += t->records[std::min(i, t->records.size() - 1)].best_so_far;
      }
    }
    for (double& c : row.curve) c /= n;
  }
  return summary;
}

void write_summary_table(const Summary& summary, std::ostream& out) {
  out << "benchmark,optimizer,runs,mean_final,stderr_final\n";
  for (const auto& r : summary.rows) {
    out << summary.benchmark << ',' << to_string(r.optimizer) << ',' << r.runs << ',' << format_double(r.mean_final)
        << ',' << format_double(r.stderr_final) << '\n';
  }
}

void write_summary_curves(const Summary& summary, std::ostream& out) {
  out << "iteration";
  std::size_t length = 0;
  for (const auto& r : summary.rows) {
    out << ',' << to_string(r.optimizer);
    length = std::max(length, r.curve.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < length; ++i) {
    out << (i + 1);
    for (const auto& r : summary.rows) {
      out << ',';
      if (i < r.curve.size()) out << format_double(r.curve[i]);
    }
    out << '\n';
  }
}

}  // namespace combo
