#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "combo/graph.hpp"
#include "combo/rng.hpp"
#include "combo/surrogate.hpp"

namespace combo {

/// K = (2 pi^3)^(-1/2), the constant of the Horseshoe density bounds.
inline const double kHorseshoeConstant =
    1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi);

struct PriorConfig {
  double tau_beta = 5.0;
  double tau_noise = 0.22360679774997896;  // sqrt(0.05)
  /// Signal variance used when the data have zero variance and the prior support collapses.
  double signal_variance_floor = 1e-2;
};

/// Truncated Normal(mean(y), ((y_max - y_min)/4)^2) on [y_min, y_max], normalized.
/// Returns -inf outside the support. When y_max == y_min the prior is a point mass at
/// mean(y): 0 there and -inf elsewhere.
double log_prior_mean(double m, std::span<const double> y);

/// Support and shape of the signal-variance prior derived from the data and the unit Gram.
struct SignalVariancePrior {
  double lower = 0.0;     // var(y) / K_max
  double upper = 0.0;     // var(y) / K_min
  double location = 0.0;  // (lower + upper) / 2
  double scale = 0.0;     // (lower + upper) / 4
  /// Support collapsed to the single point `lower` (== upper).
  bool degenerate = false;
};

SignalVariancePrior signal_variance_prior(std::span<const double> y, const Eigen::MatrixXd& unit_gram,
                                          const PriorConfig& priors);

/// Truncated Normal density over signal variance in linear units (normalized on its
/// support), -inf outside. A degenerate support is a point mass.
double log_prior_signal_variance(double signal_variance, const SignalVariancePrior& prior);
double log_prior_signal_variance(double signal_variance, std::span<const double> y, const Eigen::MatrixXd& unit_gram,
                                 const PriorConfig& priors);

/// Horseshoe upper bound log(K log(1 + 2 tau^2 / x^2)). Symmetric in x; for |x| below
/// 1e-6 tau the value at 1e-6 tau is returned. Throws DomainError for tau <= 0.
double log_prior_horseshoe(double x, double tau);

struct SliceConfig {
  double width = 1.0;
  int max_doublings = 20;
  int max_shrinks = 200;
};

/// One slice-sampling transition with interval doubling and shrinkage (with the
/// doubling acceptance test, so the target stays invariant). Throws DomainError when
/// log_density(x0) is not finite.
double slice_sample_univariate(const std::function<double(double)>& log_density, double x0, Rng& rng,
                               const SliceConfig& config = {});

struct SamplerConfig {
  int burn_in_sweeps = 100;
  int samples = 10;
  /// Repeat the burn-in on every fit call instead of only the first.
  bool burn_in_every_call = false;
  SliceConfig beta_slice{1.0, 20, 200};
  /// Width of the mean/noise slices relative to the data range/variance.
  double relative_width = 1.0;
  /// Width of the slice over log(signal variance).
  double log_signal_width = 1.0;
};

struct SamplerState {
  GpParams current;
  Rng rng;
  bool burned_in = false;
  bool initialized = false;
};

SamplerState make_sampler_state(std::uint64_t seed);

/// Which coordinate a single univariate update touched; used to observe sweep order.
struct UpdateEvent {
  enum class Param { kMean, kSignalVariance, kNoiseVariance, kBeta };
  Param param;
  std::size_t index = 0;
};
using UpdateObserver = std::function<void(const UpdateEvent&)>;

/// Joint log posterior (up to a constant) of the GP hyperparameters.
double log_posterior(const SearchSpace& space, const Dataset& data, const GpParams& params,
                     const PriorConfig& priors);

/// Default starting point: m = mean(y), signal variance = var(y) clamped into its support,
/// noise variance = 1e-3 var(y), every beta = 1.
GpParams initial_params(const SearchSpace& space, const Dataset& data, const PriorConfig& priors);

/// Runs the burn-in (first call only unless configured) and returns `config.samples`
/// posterior samples, one per full sweep. A sweep updates m, signal variance, noise
/// variance, then every beta in a freshly shuffled order.
std::vector<GpParams> fit_surrogate(const Dataset& data, SamplerState& state, const PriorConfig& priors,
                                    const SearchSpace& space, const SamplerConfig& config = {},
                                    const UpdateObserver& observer = {});

}  // namespace combo
