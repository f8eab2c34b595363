#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "combo/graph.hpp"
#include "combo/wcnf.hpp"

namespace combo {

/// Parameters of a Beta(a, b) distribution.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

// ---------------------------------------------------------------------------------------
// Contamination control

struct ContaminationConfig {
  std::size_t stages = 21;
  double lambda = 0.0;
  double rho = 1.0;
  std::size_t samples = 100;  // T
  double threshold = 0.1;     // u
  /// Confidence level; kept for the record, the penalized objective does not use it.
  double epsilon = 0.05;
  /// Per-stage prevention cost; empty means 1 for every stage.
  std::vector<double> costs;
  BetaParams initial{1.0, 30.0};
  BetaParams spread{1.0, 17.0 / 3.0};
  BetaParams restoration{1.0, 3.0 / 7.0};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fixed Monte-Carlo draws of one contamination instance: Z0[k], alpha[i][k], gamma[i][k].
class Contamination {
 public:
  explicit Contamination(ContaminationConfig config);

  /// sum_i [c_i x_i + rho/T sum_k 1{z_ik > u}] + lambda * |x|_1.
  [[nodiscard]] double operator()(const Vertex& x) const;
  /// Value without the lambda term.
  [[nodiscard]] double unregularized(const Vertex& x) const;

  [[nodiscard]] const ContaminationConfig& config() const noexcept { return config_; }
  [[nodiscard]] SearchSpace space() const;

 private:
  ContaminationConfig config_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> spread_;
  std::vector<std::vector<double>> restoration_;
};

// ---------------------------------------------------------------------------------------
// Ising sparsification

struct IsingConfig {
  std::size_t rows = 4;
  std::size_t cols = 4;
  double lambda = 0.0;
  double coupling_min = 0.05;
  double coupling_max = 5.0;
  /// Draw the sign of each coupling uniformly from {-1, +1}.
  bool random_sign = true;
  std::uint64_t seed = 0;

  void validate() const;
};

class Ising {
 public:
  explicit Ising(IsingConfig config);

  /// KL(p || q) + lambda * |x|_1, where q keeps the couplings of the edges with x_e = 1.
  [[nodiscard]] double operator()(const Vertex& x) const;
  [[nodiscard]] double kl_divergence(const Vertex& x) const;

  [[nodiscard]] const IsingConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<double>& couplings() const noexcept { return couplings_; }
  [[nodiscard]] std::size_t spins() const noexcept { return config_.rows * config_.cols; }
  [[nodiscard]] SearchSpace space() const;

 private:
  [[nodiscard]] double log_partition(const Vertex* mask) const;

  IsingConfig config_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<double> couplings_;
  // per state, bit e set when the two spins of edge e agree
  std::vector<std::uint64_t> agreement_;
  std::vector<double> moments_;  // E_p[z_i z_j] per edge
  double log_zp_ = 0.0;
};

// ---------------------------------------------------------------------------------------
// Pest control

struct PestConfig {
  std::size_t stations = 21;
  std::size_t samples = 100;
  double threshold = 0.1;
  double rho = 1.0;
  /// Off by default; the pest objective has no sparsity term.
  double lambda = 0.0;
  std::array<double, 4> prices{1.0, 0.8, 0.7, 0.5};
  /// Effectiveness of pesticide l ~ Beta(1, effectiveness_beta[l]) before tolerance.
  std::array<double, 4> effectiveness_beta{2.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0, 5.0 / 7.0};
  /// Price multiplier max(discount_floor, 1 - discount_rate * purchases so far).
  double discount_rate = 0.05;
  double discount_floor = 0.5;
  /// Effectiveness beta parameter multiplied by 1 + tolerance_rate * uses so far.
  double tolerance_rate = 0.2;
  BetaParams initial{1.0, 30.0};
  BetaParams spread{1.0, 17.0 / 3.0};
  std::uint64_t seed = 0;

  void validate() const;
};

class PestControl {
 public:
  explicit PestControl(PestConfig config);

  [[nodiscard]] double operator()(const Vertex& x) const;
  /// Purchase cost part of the objective.
  [[nodiscard]] double cost(const Vertex& x) const;
  [[nodiscard]] double unregularized(const Vertex& x) const;

  [[nodiscard]] const PestConfig& config() const noexcept { return config_; }
  [[nodiscard]] SearchSpace space() const;

 private:
  PestConfig config_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> spread_;
  std::vector<std::vector<double>> effect_uniform_;
};

// ---------------------------------------------------------------------------------------
// Discretized Branin

struct BraninConfig {
  std::size_t grid = 51;

  void validate() const;
};

/// Standard Branin on x1 in [-5, 10], x2 in [0, 15].
double branin(double x1, double x2);

class BraninDiscrete {
 public:
  explicit BraninDiscrete(BraninConfig config = {});

  [[nodiscard]] double operator()(const Vertex& v) const;
  [[nodiscard]] const BraninConfig& config() const noexcept { return config_; }
  [[nodiscard]] SearchSpace space() const;

 private:
  BraninConfig config_;
};

inline constexpr double kBraninGlobalMinimum = 0.397887357729738;

// ---------------------------------------------------------------------------------------
// Uniform interface for the harness

class Benchmark {
 public:
  virtual ~Benchmark() = default;
  [[nodiscard]] virtual std::string id() const = 0;
  [[nodiscard]] virtual const SearchSpace& space() const = 0;
  [[nodiscard]] virtual double evaluate(const Vertex& v) const = 0;
  /// Full configuration plus anything needed to rebuild the instance exactly.
  [[nodiscard]] virtual nlohmann::json describe() const = 0;
};

/// Wraps an arbitrary function; used for synthetic objectives in tests.
class FunctionBenchmark final : public Benchmark {
 public:
  FunctionBenchmark(std::string id, SearchSpace space, std::function<double(const Vertex&)> f,
                    nlohmann::json description = nlohmann::json::object());

  [[nodiscard]] std::string id() const override { return id_; }
  [[nodiscard]] const SearchSpace& space() const override { return space_; }
  [[nodiscard]] double evaluate(const Vertex& v) const override { return f_(v); }
  [[nodiscard]] nlohmann::json describe() const override { return description_; }

 private:
  std::string id_;
  SearchSpace space_;
  std::function<double(const Vertex&)> f_;
  nlohmann::json description_;
};

inline const std::vector<std::string> kBenchmarkIds{"contamination", "ising", "pest", "branin", "wmaxsat"};

/// Builds a benchmark from its id and JSON options (unknown keys raise ConfigError).
/// `instance_seed` fills the benchmark's seed unless the options set one.
std::unique_ptr<Benchmark> make_benchmark(const std::string& id, const nlohmann::json& options,
                                          std::uint64_t instance_seed);

void to_json(nlohmann::json& j, const BetaParams& p);
void to_json(nlohmann::json& j, const ContaminationConfig& c);
void to_json(nlohmann::json& j, const IsingConfig& c);
void to_json(nlohmann::json& j, const PestConfig& c);
void to_json(nlohmann::json& j, const BraninConfig& c);

}  // namespace combo
