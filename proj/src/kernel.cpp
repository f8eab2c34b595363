#include "combo/kernel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "combo/errors.hpp"

namespace combo {

Eigen::MatrixXd diffusion_factor(const Eigensystem& spectrum, double beta, bool normalize) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw DomainError("diffusion scale beta must be finite and nonnegative, got " + std::to_string(beta));
  }
  const Eigen::Index n = spectrum.eigenvalues.size();
  if (beta == 0.0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd weights(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    weights(j) = std::max(std::exp(-beta * spectrum.eigenvalues(j)), std::numeric_limits<double>::min());
  }
  if (normalize) weights /= weights.mean();
  const auto& u = spectrum.eigenvectors;
  Eigen::MatrixXd f = u * weights.asDiagonal() * u.transpose();
  // symmetrize away round-off so gram(X, Y) == gram(Y, X)^T holds exactly
  return 0.5 * (f + f.transpose());
}

KernelFactors kernel_factors(const SearchSpace& space, std::span<const double> betas, bool normalize) {
  if (betas.size() != space.num_variables()) {
    throw DomainError("expected " + std::to_string(space.num_variables()) + " betas, got " +
                      std::to_string(betas.size()));
  }
  KernelFactors out;
  out.normalized = normalize;
  out.betas.assign(betas.begin(), betas.end());
  out.factors.reserve(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    out.factors.push_back(diffusion_factor(space.variable(i).spectrum, betas[i], normalize));
  }
  return out;
}

namespace {

void check_vertex(const KernelFactors& kf, const Vertex& v) {
  if (v.size() != kf.factors.size()) throw BoundsError("vertex length does not match kernel factors");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= static_cast<std::size_t>(kf.factors[i].rows())) {
      throw BoundsError("index " + std::to_string(v[i]) + " of variable " + std::to_string(i) + " out of range");
    }
  }
}

}  // namespace

double kernel_entry(const KernelFactors& factors, const Vertex& v1, const Vertex& v2, double signal_variance) {
  check_vertex(factors, v1);
  check_vertex(factors, v2);
  double k = signal_variance;
  for (std::size_t i = 0; i < v1.size(); ++i) k *= factors.factors[i](v1[i], v2[i]);
  return k;
}

Eigen::MatrixXd gram(const KernelFactors& factors, std::span<const Vertex> x1, std::span<const Vertex> x2,
                     double signal_variance) {
  for (const auto& v : x1) check_vertex(factors, v);
  for (const auto& v : x2) check_vertex(factors, v);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(x1.size()), static_cast<Eigen::Index>(x2.size()));
  for (std::size_t a = 0; a < x1.size(); ++a) {
    for (std::size_t b = 0; b < x2.size(); ++b) {
      double k = signal_variance;
      for (std::size_t i = 0; i < factors.factors.size(); ++i) k *= factors.factors[i](x1[a][i], x2[b][i]);
      g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = k;
    }
  }
  return g;
}

}  // namespace combo
