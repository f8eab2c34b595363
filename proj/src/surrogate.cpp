#include "combo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "combo/errors.hpp"

namespace combo {

bool GpParams::valid() const noexcept {
  if (!std::isfinite(mean) || !std::isfinite(signal_variance) || !std::isfinite(noise_variance)) return false;
  if (!(signal_variance > 0.0) || !(noise_variance > 0.0)) return false;
  return std::all_of(betas.begin(), betas.end(), [](double b) { return b >= 0.0 && std::isfinite(b); });
}

void Dataset::add(Vertex v, double y) {
  vertices.push_back(std::move(v));
  values.push_back(y);
}

void Dataset::validate(const SearchSpace& space) const {
  if (vertices.size() != values.size()) throw DomainError("dataset vertex and value counts differ");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (std::isnan(values[i])) throw DomainError("dataset value " + std::to_string(i) + " is NaN");
    space.check(vertices[i]);
  }
}

SpdFactor::SpdFactor(const Eigen::MatrixXd& matrix) {
  llt.compute(matrix);
  if (llt.info() == Eigen::Success) return;
  const double mean_diag = std::max(matrix.diagonal().mean(), std::numeric_limits<double>::min());
  for (double rel : {1e-8, 1e-7, 1e-6}) {
    jitter = rel * mean_diag;
    Eigen::MatrixXd regularized = matrix;
    regularized.diagonal().array() += jitter;
    llt.compute(regularized);
    if (llt.info() == Eigen::Success) return;
  }
  throw NumericError("Cholesky factorization failed for a " + std::to_string(matrix.rows()) +
                     "x" + std::to_string(matrix.cols()) + " covariance after jitter " + std::to_string(jitter));
}

double SpdFactor::log_determinant() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd data_gram(const KernelFactors& factors, const Dataset& data) {
  return gram(factors, data.vertices, data.vertices, 1.0);
}

double neg_log_marginal_likelihood(const Eigen::MatrixXd& unit_gram, std::span<const double> values, double mean,
                                   double signal_variance, double noise_variance) {
  const auto n = static_cast<Eigen::Index>(values.size());
  if (n == 0) throw DomainError("marginal likelihood needs at least one observation");
  Eigen::MatrixXd cov = signal_variance * unit_gram;
  cov.diagonal().array() += noise_variance;
  const SpdFactor chol(cov);
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) resid(i) = values[static_cast<std::size_t>(i)] - mean;
  const Eigen::VectorXd whitened = chol.llt.matrixL().solve(resid);
  return 0.5 * whitened.squaredNorm() + 0.5 * chol.log_determinant() +
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double neg_log_marginal_likelihood(const Dataset& data, const GpParams& params, const KernelFactors& factors) {
  if (data.empty()) throw DomainError("marginal likelihood needs at least one observation");
  return neg_log_marginal_likelihood(data_gram(factors, data), data.values, params.mean, params.signal_variance,
                                     params.noise_variance);
}

// ---------------------------------------------------------------------------------------
// GpPosterior

GpPosterior::GpPosterior(const SearchSpace& space, const Dataset& data, const GpParams& params)
    : GpPosterior(data, params, kernel_factors(space, params.betas)) {}

GpPosterior::GpPosterior(const Dataset& data, const GpParams& params, KernelFactors factors)
    : params_(params), factors_(std::move(factors)), n_(data.size()) {
  if (data.vertices.size() != data.values.size()) throw DomainError("dataset vertex and value counts differ");
  const std::size_t d = factors_.factors.size();
  data_columns_.assign(d, std::vector<Vertex::value_type>(n_));
  for (std::size_t a = 0; a < n_; ++a) {
    if (data.vertices[a].size() != d) throw BoundsError("data vertex length does not match kernel factors");
    for (std::size_t i = 0; i < d; ++i) data_columns_[i][a] = data.vertices[a][i];
  }
  if (n_ == 0) return;

  Eigen::MatrixXd cov = params_.signal_variance * data_gram(factors_, data);
  cov.diagonal().array() += params_.noise_variance;
  const SpdFactor chol(cov);
  chol_lower_ = chol.llt.matrixL();
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n_));
  for (std::size_t a = 0; a < n_; ++a) resid(static_cast<Eigen::Index>(a)) = data.values[a] - params_.mean;
  alpha_ = chol.llt.solve(resid);
}

void GpPosterior::prior_only(std::span<const Vertex> candidates, std::span<PredictiveDistribution> out) const {
  for (std::size_t b = 0; b < candidates.size(); ++b) {
    out[b] = {params_.mean, kernel_entry(factors_, candidates[b], candidates[b], params_.signal_variance)};
  }
}

void GpPosterior::predict(std::span<const Vertex> candidates, std::span<PredictiveDistribution> out) const {
  if (out.size() != candidates.size()) throw DomainError("prediction output size mismatch");
  if (n_ == 0) {
    prior_only(candidates, out);
    return;
  }
  const std::size_t d = factors_.factors.size();
  for (const auto& v : candidates) {
    if (v.size() != d) throw BoundsError("candidate vertex length does not match kernel factors");
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i] >= static_cast<std::size_t>(factors_.factors[i].rows())) {
        throw BoundsError("candidate index out of range for variable " + std::to_string(i));
      }
    }
  }

  constexpr std::size_t kChunk = 512;
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd cross;
  for (std::size_t start = 0; start < candidates.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, candidates.size() - start);
    cross.setConstant(n, static_cast<Eigen::Index>(count), params_.signal_variance);
    for (std::size_t i = 0; i < d; ++i) {
      const Eigen::MatrixXd& f = factors_.factors[i];
      const auto& column_idx = data_columns_[i];
      for (std::size_t b = 0; b < count; ++b) {
        // factors are symmetric, so column c holds row c contiguously
        const double* frow = f.data() + static_cast<Eigen::Index>(candidates[start + b][i]) * f.rows();
        double* kcol = cross.col(static_cast<Eigen::Index>(b)).data();
        for (std::size_t a = 0; a < n_; ++a) kcol[a] *= frow[column_idx[a]];
      }
    }
    const Eigen::VectorXd means = cross.transpose() * alpha_;
    chol_lower_.triangularView<Eigen::Lower>().solveInPlace(cross);
    const Eigen::VectorXd explained = cross.colwise().squaredNorm().transpose();
    for (std::size_t b = 0; b < count; ++b) {
      const Vertex& v = candidates[start + b];
      double prior_var = params_.signal_variance;
      for (std::size_t i = 0; i < d; ++i) prior_var *= factors_.factors[i](v[i], v[i]);
      const auto bi = static_cast<Eigen::Index>(b);
      out[start + b] = {params_.mean + means(bi), std::max(0.0, prior_var - explained(bi))};
    }
  }
}

PredictiveDistribution GpPosterior::predict(const Vertex& v) const {
  PredictiveDistribution out;
  predict(std::span<const Vertex>(&v, 1), std::span<PredictiveDistribution>(&out, 1));
  return out;
}

PredictiveDistribution predict(const Vertex& v, const Dataset& data, const GpParams& params,
                               const KernelFactors& factors) {
  return GpPosterior(data, params, factors).predict(v);
}

}  // namespace combo
