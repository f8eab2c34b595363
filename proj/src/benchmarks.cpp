#include "combo/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/beta.hpp>

#include "combo/errors.hpp"
#include "combo/rng.hpp"
#include "detail/json_fields.hpp"

namespace combo {

namespace {

double beta_quantile(const BetaParams& p, double u) {
  return boost::math::quantile(boost::math::beta_distribution<double>(p.a, p.b), u);
}

// open interval (0, 1): the quantile is finite at both ends but 0 would pin draws to 0
double open_uniform(Rng& rng) {
  double u = 0.0;
  do {
    u = uniform01(rng);
  } while (u <= 0.0);
  return u;
}

void check_beta(const BetaParams& p, const char* name) {
  if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b)) {
    throw ConfigError(std::string(name) + ": beta parameters must be positive and finite");
  }
}

void check_binary(const Vertex& x, std::size_t length, const char* what) {
  if (x.size() != length) {
    throw BoundsError(std::string(what) + ": expected " + std::to_string(length) + " variables, got " +
                      std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1) throw BoundsError(std::string(what) + ": variable " + std::to_string(i) + " is not binary");
  }
}

double l1(const Vertex& x) {
  double s = 0.0;
  for (auto xi : x) s += (xi != 0) ? 1.0 : 0.0;
  return s;
}

SearchSpace binary_space(std::size_t n) {
  return SearchSpace(std::vector<SubGraph>(n, SubGraph::complete(2)));
}

}  // namespace

// ---------------------------------------------------------------------------------------
// Contamination control

void ContaminationConfig::validate() const {
  if (stages == 0) throw ConfigError("contamination: stages must be positive");
  if (samples == 0) throw ConfigError("contamination: samples must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("contamination: threshold must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("contamination: epsilon must lie in (0, 1)");
  if (!(lambda >= 0.0) || !(rho >= 0.0)) throw ConfigError("contamination: lambda and rho must be nonnegative");
  if (!costs.empty() && costs.size() != stages) throw ConfigError("contamination: one cost per stage expected");
  check_beta(initial, "contamination.initial");
  check_beta(spread, "contamination.spread");
  check_beta(restoration, "contamination.restoration");
}

Contamination::Contamination(ContaminationConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.costs.empty()) config_.costs.assign(config_.stages, 1.0);
  Rng rng(config_.seed);
  const std::size_t t = config_.samples;
  initial_.resize(t);
  for (auto& z : initial_) z = beta_quantile(config_.initial, open_uniform(rng));
  spread_.assign(config_.stages, std::vector<double>(t));
  restoration_.assign(config_.stages, std::vector<double>(t));
  for (std::size_t i = 0; i < config_.stages; ++i) {
    for (std::size_t k = 0; k < t; ++k) {
      spread_[i][k] = beta_quantile(config_.spread, open_uniform(rng));
      restoration_[i][k] = beta_quantile(config_.restoration, open_uniform(rng));
    }
  }
}

double Contamination::unregularized(const Vertex& x) const {
  check_binary(x, config_.stages, "contamination");
  const std::size_t t = config_.samples;
  std::vector<double> z = initial_;
  double total = 0.0;
  for (std::size_t i = 0; i < config_.stages; ++i) {
    const double xi = x[i] != 0 ? 1.0 : 0.0;
    std::size_t above = 0;
    for (std::size_t k = 0; k < t; ++k) {
      z[k] = spread_[i][k] * (1.0 - xi) * (1.0 - z[k]) + (1.0 - restoration_[i][k] * xi) * z[k];
      if (z[k] > config_.threshold) ++above;
    }
    total += config_.costs[i] * xi + config_.rho * static_cast<double>(above) / static_cast<double>(t);
  }
  return total;
}

double Contamination::operator()(const Vertex& x) const {
  return unregularized(x) + config_.lambda * l1(x);
}

SearchSpace Contamination::space() const { return binary_space(config_.stages); }

// ---------------------------------------------------------------------------------------
// Ising sparsification

void IsingConfig::validate() const {
  if (rows == 0 || cols == 0) throw ConfigError("ising: grid dimensions must be positive");
  if (rows * cols > 24) throw ConfigError("ising: exact enumeration is limited to 24 spins");
  if (!(coupling_min > 0.0) || !(coupling_max >= coupling_min)) {
    throw ConfigError("ising: need 0 < coupling_min <= coupling_max");
  }
  if (!(lambda >= 0.0)) throw ConfigError("ising: lambda must be nonnegative");
}

Ising::Ising(IsingConfig config) : config_(config) {
  config_.validate();
  const std::size_t r = config_.rows;
  const std::size_t c = config_.cols;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      const std::size_t s = a * c + b;
      if (b + 1 < c) edges_.emplace_back(s, s + 1);
      if (a + 1 < r) edges_.emplace_back(s, s + c);
    }
  }
  if (edges_.size() > 64) throw ConfigError("ising: at most 64 edges supported");
  Rng rng(config_.seed);
  std::uniform_real_distribution<double> magnitude(config_.coupling_min, config_.coupling_max);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    double j = magnitude(rng);
    if (config_.random_sign && std::bernoulli_distribution(0.5)(rng)) j = -j;
    couplings_.push_back(j);
  }

  const std::size_t n = spins();
  const std::size_t states = std::size_t{1} << n;
  agreement_.resize(states);
  for (std::size_t s = 0; s < states; ++s) {
    std::uint64_t bits = 0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (((s >> edges_[e].first) & 1U) == ((s >> edges_[e].second) & 1U)) bits |= std::uint64_t{1} << e;
    }
    agreement_[s] = bits;
  }
  log_zp_ = log_partition(nullptr);

  moments_.assign(edges_.size(), 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    double energy = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      energy += 2.0 * couplings_[e] * (((agreement_[s] >> e) & 1U) ? 1.0 : -1.0);
    }
    const double p = std::exp(energy - log_zp_);
    for (std::size_t e = 0; e < edges_.size(); ++e) moments_[e] += p * (((agreement_[s] >> e) & 1U) ? 1.0 : -1.0);
  }
}

double Ising::log_partition(const Vertex* mask) const {
  const std::size_t states = agreement_.size();
  std::vector<double> energy(states, 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    double acc = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (mask != nullptr && (*mask)[e] == 0) continue;
      // z^T J z with a symmetric J counts each edge twice
      acc += 2.0 * couplings_[e] * (((agreement_[s] >> e) & 1U) ? 1.0 : -1.0);
    }
    energy[s] = acc;
  }
  const double top = *std::max_element(energy.begin(), energy.end());
  double sum = 0.0;
  for (double v : energy) sum += std::exp(v - top);
  return top + std::log(sum);
}

double Ising::kl_divergence(const Vertex& x) const {
  check_binary(x, edges_.size(), "ising");
  // KL = E_p[E_p(z) - E_q(z)] - log Z_p + log Z_q, and E_p - E_q only involves removed edges
  double expected_gap = 0.0;
  bool all_kept = true;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (x[e] == 0) {
      expected_gap += 2.0 * couplings_[e] * moments_[e];
      all_kept = false;
    }
  }
  if (all_kept) return 0.0;
  return std::max(0.0, expected_gap - log_zp_ + log_partition(&x));
}

double Ising::operator()(const Vertex& x) const { return kl_divergence(x) + config_.lambda * l1(x); }

SearchSpace Ising::space() const { return binary_space(edges_.size()); }

// ---------------------------------------------------------------------------------------
// Pest control

void PestConfig::validate() const {
  if (stations == 0) throw ConfigError("pest: stations must be positive");
  if (samples == 0) throw ConfigError("pest: samples must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("pest: threshold must lie in (0, 1)");
  if (!(lambda >= 0.0) || !(rho >= 0.0)) throw ConfigError("pest: lambda and rho must be nonnegative");
  for (double p : prices) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("pest: prices must be nonnegative");
  }
  for (double b : effectiveness_beta) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("pest: effectiveness beta parameters must be positive");
  }
  if (!(discount_rate >= 0.0) || !(discount_floor >= 0.0 && discount_floor <= 1.0)) {
    throw ConfigError("pest: need discount_rate >= 0 and discount_floor in [0, 1]");
  }
  if (!(tolerance_rate >= 0.0)) throw ConfigError("pest: tolerance_rate must be nonnegative");
  check_beta(initial, "pest.initial");
  check_beta(spread, "pest.spread");
}

PestControl::PestControl(PestConfig config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const std::size_t t = config_.samples;
  initial_.resize(t);
  for (auto& z : initial_) z = beta_quantile(config_.initial, open_uniform(rng));
  spread_.assign(config_.stations, std::vector<double>(t));
  effect_uniform_.assign(config_.stations, std::vector<double>(t));
  for (std::size_t i = 0; i < config_.stations; ++i) {
    for (std::size_t k = 0; k < t; ++k) {
      spread_[i][k] = beta_quantile(config_.spread, open_uniform(rng));
      // common random numbers: the effectiveness draw is a fixed uniform pushed through
      // whichever beta the action sequence produces
      effect_uniform_[i][k] = open_uniform(rng);
    }
  }
}

namespace {

void check_pest(const Vertex& x, std::size_t stations) {
  if (x.size() != stations) {
    throw BoundsError("pest: expected " + std::to_string(stations) + " stations, got " + std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 4) throw BoundsError("pest: station " + std::to_string(i) + " choice exceeds 4");
  }
}

}  // namespace

double PestControl::cost(const Vertex& x) const {
  check_pest(x, config_.stations);
  std::array<int, 4> purchases{};
  double total = 0.0;
  for (std::size_t i = 0; i < config_.stations; ++i) {
    if (x[i] == 0) continue;
    const std::size_t l = x[i] - 1;
    const double discount = std::max(config_.discount_floor, 1.0 - config_.discount_rate * purchases[l]);
    total += config_.prices[l] * discount;
    ++purchases[l];
  }
  return total;
}

double PestControl::unregularized(const Vertex& x) const {
  check_pest(x, config_.stations);
  const std::size_t t = config_.samples;
  std::array<int, 4> uses{};
  std::vector<double> z = initial_;
  double penalty = 0.0;
  for (std::size_t i = 0; i < config_.stations; ++i) {
    std::size_t above = 0;
    if (x[i] == 0) {
      for (std::size_t k = 0; k < t; ++k) {
        z[k] = spread_[i][k] * (1.0 - z[k]) + z[k];
        if (z[k] > config_.threshold) ++above;
      }
    } else {
      const std::size_t l = x[i] - 1;
      const BetaParams effect{1.0, config_.effectiveness_beta[l] * (1.0 + config_.tolerance_rate * uses[l])};
      for (std::size_t k = 0; k < t; ++k) {
        z[k] = (1.0 - beta_quantile(effect, effect_uniform_[i][k])) * z[k];
        if (z[k] > config_.threshold) ++above;
      }
      ++uses[l];
    }
    penalty += config_.rho * static_cast<double>(above) / static_cast<double>(t);
  }
  return cost(x) + penalty;
}

double PestControl::operator()(const Vertex& x) const { return unregularized(x) + config_.lambda * l1(x); }

SearchSpace PestControl::space() const {
  return SearchSpace(std::vector<SubGraph>(config_.stations, SubGraph::complete(5)));
}

// ---------------------------------------------------------------------------------------
// Branin

void BraninConfig::validate() const {
  if (grid < 2) throw ConfigError("branin: grid needs at least 2 points per dimension");
}

double branin(double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

BraninDiscrete::BraninDiscrete(BraninConfig config) : config_(config) { config_.validate(); }

double BraninDiscrete::operator()(const Vertex& v) const {
  if (v.size() != 2 || v[0] >= config_.grid || v[1] >= config_.grid) {
    throw BoundsError("branin: vertex outside the " + std::to_string(config_.grid) + "x" +
                      std::to_string(config_.grid) + " grid");
  }
  const double steps = static_cast<double>(config_.grid - 1);
  const double u = v[0] / steps;
  const double w = v[1] / steps;
  return branin(-5.0 + 15.0 * u, 15.0 * w);
}

SearchSpace BraninDiscrete::space() const {
  return SearchSpace({SubGraph::path(config_.grid), SubGraph::path(config_.grid)});
}

// ---------------------------------------------------------------------------------------
// Benchmark adapters

FunctionBenchmark::FunctionBenchmark(std::string id, SearchSpace space, std::function<double(const Vertex&)> f,
                                     nlohmann::json description)
    : id_(std::move(id)), space_(std::move(space)), f_(std::move(f)), description_(std::move(description)) {}

void to_json(nlohmann::json& j, const BetaParams& p) { j = {{"a", p.a}, {"b", p.b}}; }

void to_json(nlohmann::json& j, const ContaminationConfig& c) {
  j = {{"stages", c.stages},   {"lambda", c.lambda},       {"rho", c.rho},
       {"samples", c.samples}, {"threshold", c.threshold}, {"epsilon", c.epsilon},
       {"costs", c.costs},     {"initial", c.initial},     {"spread", c.spread},
       {"restoration", c.restoration}, {"seed", c.seed}};
}

void to_json(nlohmann::json& j, const IsingConfig& c) {
  j = {{"rows", c.rows},
       {"cols", c.cols},
       {"lambda", c.lambda},
       {"coupling_min", c.coupling_min},
       {"coupling_max", c.coupling_max},
       {"random_sign", c.random_sign},
       {"seed", c.seed}};
}

void to_json(nlohmann::json& j, const PestConfig& c) {
  j = {{"stations", c.stations},
       {"samples", c.samples},
       {"threshold", c.threshold},
       {"rho", c.rho},
       {"lambda", c.lambda},
       {"prices", c.prices},
       {"effectiveness_beta", c.effectiveness_beta},
       {"discount_rate", c.discount_rate},
       {"discount_floor", c.discount_floor},
       {"tolerance_rate", c.tolerance_rate},
       {"initial", c.initial},
       {"spread", c.spread},
       {"seed", c.seed}};
}

void to_json(nlohmann::json& j, const BraninConfig& c) { j = {{"grid", c.grid}}; }

namespace {

void read_beta(detail::FieldReader& r, const std::string& key, BetaParams& out) {
  if (const auto* node = r.child(key)) {
    detail::FieldReader sub(*node, r.where() + "." + key);
    sub.read("a", out.a);
    sub.read("b", out.b);
    sub.finish();
  }
}

template <typename Cfg>
class ConfiguredBenchmark final : public Benchmark {
 public:
  template <typename Objective>
  ConfiguredBenchmark(std::string id, Cfg cfg, Objective objective, nlohmann::json extra = nlohmann::json::object())
      : id_(std::move(id)), cfg_(std::move(cfg)), space_(objective.space()), extra_(std::move(extra)) {
    f_ = [obj = std::move(objective)](const Vertex& v) { return obj(v); };
  }

  [[nodiscard]] std::string id() const override { return id_; }
  [[nodiscard]] const SearchSpace& space() const override { return space_; }
  [[nodiscard]] double evaluate(const Vertex& v) const override { return f_(v); }
  [[nodiscard]] nlohmann::json describe() const override {
    nlohmann::json j = cfg_;
    for (auto& [k, v] : extra_.items()) j[k] = v;
    return j;
  }

 private:
  std::string id_;
  Cfg cfg_;
  SearchSpace space_;
  std::function<double(const Vertex&)> f_;
  nlohmann::json extra_;
};

struct WcnfOptions {
  std::string path;
  bool synthetic = false;
  std::size_t n_vars = 10;
  std::size_t n_clauses = 40;
  std::size_t max_len = 3;
  int max_weight = 10;
  std::uint64_t seed = 0;
  WeightNormalization normalization = WeightNormalization::kStandardize;
};

class WcnfBenchmark final : public Benchmark {
 public:
  WcnfBenchmark(WcnfInstance instance, nlohmann::json description)
      : instance_(std::move(instance)),
        space_(binary_space(instance_.n_vars)),
        description_(std::move(description)) {}

  [[nodiscard]] std::string id() const override { return "wmaxsat"; }
  [[nodiscard]] const SearchSpace& space() const override { return space_; }
  [[nodiscard]] double evaluate(const Vertex& v) const override { return wmaxsat_objective(v, instance_); }
  [[nodiscard]] nlohmann::json describe() const override {
    nlohmann::json j = description_;
    j["instance"] = serialize_wcnf(instance_);
    return j;
  }

 private:
  WcnfInstance instance_;
  SearchSpace space_;
  nlohmann::json description_;
};

}  // namespace

std::unique_ptr<Benchmark> make_benchmark(const std::string& id, const nlohmann::json& options,
                                          std::uint64_t instance_seed) {
  const nlohmann::json empty = nlohmann::json::object();
  const nlohmann::json& opts = options.is_null() ? empty : options;
  detail::FieldReader r(opts, "benchmark_config");

  if (id == "contamination") {
    ContaminationConfig c;
    c.seed = instance_seed;
    r.read("stages", c.stages);
    r.read("lambda", c.lambda);
    r.read("rho", c.rho);
    r.read("samples", c.samples);
    r.read("threshold", c.threshold);
    r.read("epsilon", c.epsilon);
    r.read("costs", c.costs);
    read_beta(r, "initial", c.initial);
    read_beta(r, "spread", c.spread);
    read_beta(r, "restoration", c.restoration);
    r.read("seed", c.seed);
    r.finish();
    return std::make_unique<ConfiguredBenchmark<ContaminationConfig>>(id, c, Contamination(c));
  }
  if (id == "ising") {
    IsingConfig c;
    c.seed = instance_seed;
    r.read("rows", c.rows);
    r.read("cols", c.cols);
    r.read("lambda", c.lambda);
    r.read("coupling_min", c.coupling_min);
    r.read("coupling_max", c.coupling_max);
    r.read("random_sign", c.random_sign);
    r.read("seed", c.seed);
    r.finish();
    return std::make_unique<ConfiguredBenchmark<IsingConfig>>(id, c, Ising(c));
  }
  if (id == "pest") {
    PestConfig c;
    c.seed = instance_seed;
    r.read("stations", c.stations);
    r.read("samples", c.samples);
    r.read("threshold", c.threshold);
    r.read("rho", c.rho);
    r.read("lambda", c.lambda);
    r.read("prices", c.prices);
    r.read("effectiveness_beta", c.effectiveness_beta);
    r.read("discount_rate", c.discount_rate);
    r.read("discount_floor", c.discount_floor);
    r.read("tolerance_rate", c.tolerance_rate);
    read_beta(r, "initial", c.initial);
    read_beta(r, "spread", c.spread);
    r.read("seed", c.seed);
    r.finish();
    return std::make_unique<ConfiguredBenchmark<PestConfig>>(id, c, PestControl(c));
  }
  if (id == "branin") {
    BraninConfig c;
    r.read("grid", c.grid);
    r.finish();
    return std::make_unique<ConfiguredBenchmark<BraninConfig>>(id, c, BraninDiscrete(c));
  }
  if (id == "wmaxsat") {
    WcnfOptions o;
    o.seed = instance_seed;
    std::string norm = to_string(o.normalization);
    r.read("path", o.path);
    r.read("synthetic", o.synthetic);
    r.read("n_vars", o.n_vars);
    r.read("n_clauses", o.n_clauses);
    r.read("max_len", o.max_len);
    r.read("max_weight", o.max_weight);
    r.read("seed", o.seed);
    r.read("normalization", norm);
    r.finish();
    o.normalization = weight_normalization_from_string(norm);
    nlohmann::json desc = {{"normalization", norm}};
    if (!o.path.empty()) {
      if (o.synthetic) throw ConfigError("wmaxsat: set either 'path' or 'synthetic', not both");
      desc["path"] = o.path;
      return std::make_unique<WcnfBenchmark>(read_wcnf(o.path, o.normalization), desc);
    }
    if (!o.synthetic) throw ConfigError("wmaxsat: needs 'path' to a WCNF file or 'synthetic': true");
    desc.update({{"synthetic", true},
                 {"n_vars", o.n_vars},
                 {"n_clauses", o.n_clauses},
                 {"max_len", o.max_len},
                 {"max_weight", o.max_weight},
                 {"seed", o.seed}});
    return std::make_unique<WcnfBenchmark>(
        random_wcnf(o.n_vars, o.n_clauses, o.max_len, o.max_weight, o.seed, o.normalization), desc);
  }
  throw ConfigError("unknown benchmark '" + id + "' (contamination, ising, pest, branin, wmaxsat)");
}

}  // namespace combo
