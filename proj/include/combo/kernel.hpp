#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "combo/graph.hpp"

namespace combo {

/// Per-variable diffusion-kernel factors. The ARD diffusion kernel between two vertices
/// is the product over variables of factors[i](v1[i], v2[i]).
///
/// factors[i] = U_i diag(exp(-beta_i * lambda) / psi_i) U_i^T with
/// psi_i = mean(exp(-beta_i * lambda)), so every factor has trace |V_i|.
struct KernelFactors {
  std::vector<Eigen::MatrixXd> factors;
  std::vector<double> betas;
  bool normalized = true;
};

/// Diffusion factor of one variable. Throws DomainError for beta < 0.
Eigen::MatrixXd diffusion_factor(const Eigensystem& spectrum, double beta, bool normalize = true);

/// Builds all factors from the precomputed eigensystems; O(sum_i |V_i|^3).
/// `normalize = false` disables the psi normalization (plain exp(-beta L)).
KernelFactors kernel_factors(const SearchSpace& space, std::span<const double> betas,
                             bool normalize = true);

/// signal_variance * prod_i factors[i](v1[i], v2[i]).
double kernel_entry(const KernelFactors& factors, const Vertex& v1, const Vertex& v2,
                    double signal_variance);

/// Gram matrix with entry (a, b) = kernel_entry(x1[a], x2[b]).
Eigen::MatrixXd gram(const KernelFactors& factors, std::span<const Vertex> x1,
                     std::span<const Vertex> x2, double signal_variance);

}  // namespace combo
