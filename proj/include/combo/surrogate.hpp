#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "combo/graph.hpp"
#include "combo/kernel.hpp"

namespace combo {

/// One posterior sample of the GP hyperparameters.
struct GpParams {
  double mean = 0.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-3;
  std::vector<double> betas;

  /// signal_variance > 0, noise_variance > 0, every beta >= 0, all finite.
  [[nodiscard]] bool valid() const noexcept;
};

/// Evaluated vertices and their objective values.
struct Dataset {
  std::vector<Vertex> vertices;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const noexcept { return vertices.size(); }
  [[nodiscard]] bool empty() const noexcept { return vertices.empty(); }
  void add(Vertex v, double y);
  /// Throws if lengths differ, a value is NaN, or a vertex is outside `space`.
  void validate(const SearchSpace& space) const;
};

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;
};

/// Cholesky factor of an SPD matrix, retried with diagonal jitter of 1e-8, 1e-7 and 1e-6
/// times the mean diagonal. Throws NumericError when every attempt fails.
struct SpdFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  explicit SpdFactor(const Eigen::MatrixXd& matrix);
  [[nodiscard]] double log_determinant() const;
};

/// Unit-signal Gram matrix of the data vertices.
Eigen::MatrixXd data_gram(const KernelFactors& factors, const Dataset& data);

/// 0.5 r^T C^-1 r + 0.5 log det C + (n/2) log 2 pi with r = y - m and
/// C = signal_variance * K + noise_variance * I.
double neg_log_marginal_likelihood(const Dataset& data, const GpParams& params, const KernelFactors& factors);

/// Same as above with the unit Gram K already assembled.
double neg_log_marginal_likelihood(const Eigen::MatrixXd& unit_gram, std::span<const double> values,
                                   double mean, double signal_variance, double noise_variance);

/// GP conditioned on a dataset under one hyperparameter sample. The factorized Gram is
/// computed once; predictions are read-only and may be shared across threads.
class GpPosterior {
 public:
  GpPosterior(const SearchSpace& space, const Dataset& data, const GpParams& params);
  GpPosterior(const Dataset& data, const GpParams& params, KernelFactors factors);

  [[nodiscard]] PredictiveDistribution predict(const Vertex& v) const;
  /// Batched prediction; out.size() must equal candidates.size().
  void predict(std::span<const Vertex> candidates, std::span<PredictiveDistribution> out) const;

  [[nodiscard]] const KernelFactors& factors() const noexcept { return factors_; }
  [[nodiscard]] const GpParams& params() const noexcept { return params_; }

 private:
  void prior_only(std::span<const Vertex> candidates, std::span<PredictiveDistribution> out) const;

  GpParams params_;
  KernelFactors factors_;
  // data indices stored variable-major for the cross-covariance loop
  std::vector<std::vector<Vertex::value_type>> data_columns_;
  std::size_t n_ = 0;
  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd alpha_;
};

/// Predictive mean and variance at one vertex; an empty dataset yields the prior.
PredictiveDistribution predict(const Vertex& v, const Dataset& data, const GpParams& params,
                               const KernelFactors& factors);

}  // namespace combo
