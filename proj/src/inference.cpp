#include "combo/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "combo/errors.hpp"
#include "combo/kernel.hpp"

namespace combo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxSupport = 1e300;

double mean_of(std::span<const double> y) {
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double population_variance(std::span<const double> y) {
  const double mu = mean_of(y);
  double acc = 0.0;
  for (double v : y) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(y.size());
}

double log_std_normal_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi); }

}  // namespace

// ---------------------------------------------------------------------------------------
// Priors

double log_prior_mean(double m, std::span<const double> y) {
  if (y.empty()) throw DomainError("mean prior needs data");
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double mu = mean_of(y);
  if (hi == lo) return m == mu ? 0.0 : kNegInf;
  if (m < lo || m > hi) return kNegInf;
  const double sigma = (hi - lo) / 4.0;
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double mass = 0.5 * (std::erf(b / std::numbers::sqrt2) - std::erf(a / std::numbers::sqrt2));
  return log_std_normal_pdf((m - mu) / sigma) - std::log(sigma) - std::log(mass);
}

SignalVariancePrior signal_variance_prior(std::span<const double> y, const Eigen::MatrixXd& unit_gram,
                                          const PriorConfig& priors) {
  if (y.empty()) throw DomainError("signal variance prior needs data");
  SignalVariancePrior p;
  const double var_y = population_variance(y);
  if (!(var_y > 0.0)) {
    p.lower = p.upper = p.location = priors.signal_variance_floor;
    p.degenerate = true;
    return p;
  }
  const double k_max = unit_gram.maxCoeff();
  const double k_min = std::max(unit_gram.minCoeff(), std::numeric_limits<double>::min());
  p.lower = var_y / k_max;
  p.upper = std::min(var_y / k_min, kMaxSupport);
  p.location = 0.5 * p.lower + 0.5 * p.upper;
  p.scale = 0.25 * p.lower + 0.25 * p.upper;
  p.degenerate = !(p.upper > p.lower * (1.0 + 1e-12));
  if (p.degenerate) p.upper = p.location = p.lower;
  return p;
}

double log_prior_signal_variance(double signal_variance, const SignalVariancePrior& prior) {
  if (prior.degenerate) {
    return std::abs(signal_variance - prior.lower) <= 1e-9 * prior.lower ? 0.0 : kNegInf;
  }
  if (!(signal_variance >= prior.lower && signal_variance <= prior.upper)) return kNegInf;
  const double half_width = (prior.upper - prior.lower) / (2.0 * prior.scale);
  const double mass = std::erf(half_width / std::numbers::sqrt2);
  return log_std_normal_pdf((signal_variance - prior.location) / prior.scale) - std::log(prior.scale) -
         std::log(mass);
}

double log_prior_signal_variance(double signal_variance, std::span<const double> y, const Eigen::MatrixXd& unit_gram,
                                 const PriorConfig& priors) {
  return log_prior_signal_variance(signal_variance, signal_variance_prior(y, unit_gram, priors));
}

double log_prior_horseshoe(double x, double tau) {
  if (!(tau > 0.0)) throw DomainError("horseshoe tau must be positive, got " + std::to_string(tau));
  const double ax = std::max(std::abs(x), 1e-6 * tau);
  return std::log(kHorseshoeConstant) + std::log(std::log1p(2.0 * tau * tau / (ax * ax)));
}

// ---------------------------------------------------------------------------------------
// Slice sampling

double slice_sample_univariate(const std::function<double(double)>& target, double x0, Rng& rng,
                               const SliceConfig& config) {
  // the acceptance test revisits interval endpoints; remember what was computed
  std::vector<std::pair<double, double>> seen;
  const auto log_density = [&](double x) {
    for (const auto& [sx, sf] : seen) {
      if (sx == x) return sf;
    }
    const double f = target(x);
    seen.emplace_back(x, f);
    return f;
  };
  const double f0 = log_density(x0);
  if (!std::isfinite(f0)) throw DomainError("slice sampler started at a point with zero density");
  const double w = config.width;
  const double level = f0 + std::log(uniform01(rng));

  // doubling step-out
  double left = x0 - w * uniform01(rng);
  double right = left + w;
  double f_left = log_density(left);
  double f_right = log_density(right);
  int budget = config.max_doublings;
  while (budget > 0 && (level < f_left || level < f_right)) {
    if (uniform01(rng) < 0.5) {
      left -= right - left;
      f_left = log_density(left);
    } else {
      right += right - left;
      f_right = log_density(right);
    }
    --budget;
  }
  if (budget == 0 && (level < f_left || level < f_right)) {
    spdlog::warn("slice sampler hit the doubling cap ({}) at x0 = {}", config.max_doublings, x0);
  }

  // Neal's acceptance test for intervals built by doubling
  const auto acceptable = [&](double x1) {
    double lo = left;
    double hi = right;
    bool differ = false;
    while (hi - lo > 1.1 * w) {
      const double mid = 0.5 * (lo + hi);
      if ((x0 < mid && x1 >= mid) || (x0 >= mid && x1 < mid)) differ = true;
      if (x1 < mid) {
        hi = mid;
      } else {
        lo = mid;
      }
      if (differ && level >= log_density(lo) && level >= log_density(hi)) return false;
    }
    return true;
  };

  double lo = left;
  double hi = right;
  for (int shrink = 0; shrink < config.max_shrinks; ++shrink) {
    const double x1 = lo + uniform01(rng) * (hi - lo);
    if (level < log_density(x1) && acceptable(x1)) return x1;
    if (x1 < x0) {
      lo = x1;
    } else {
      hi = x1;
    }
  }
  spdlog::warn("slice sampler exhausted {} shrink steps at x0 = {}; keeping x0", config.max_shrinks, x0);
  return x0;
}

// ---------------------------------------------------------------------------------------
// Hyperparameter posterior

namespace {

// Conditional log densities of each hyperparameter with the others held fixed. Terms that
// do not depend on the coordinate being updated are dropped.
class ConditionalPosterior {
 public:
  ConditionalPosterior(const SearchSpace& space, const Dataset& data, const PriorConfig& priors, GpParams params)
      : space_(space), priors_(priors), params_(std::move(params)), n_(data.size()),
        d_(space.num_variables()), y_(data.values) {
    columns_.assign(d_, std::vector<Vertex::value_type>(n_));
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t i = 0; i < d_; ++i) columns_[i][a] = data.vertices[a][i];
    }
    factors_ = kernel_factors(space_, params_.betas).factors;
    gram_ = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_), 1.0);
    for (std::size_t i = 0; i < d_; ++i) multiply_factor(gram_, factors_[i], i);
    const auto [lo, hi] = std::minmax_element(y_.begin(), y_.end());
    y_min_ = *lo;
    y_max_ = *hi;
    var_y_ = population_variance(y_);
  }

  [[nodiscard]] const GpParams& params() const noexcept { return params_; }
  [[nodiscard]] double y_min() const noexcept { return y_min_; }
  [[nodiscard]] double y_max() const noexcept { return y_max_; }
  [[nodiscard]] double var_y() const noexcept { return var_y_; }

  // --- constant mean -----------------------------------------------------------------
  void prepare_mean() {
    Eigen::MatrixXd cov = params_.signal_variance * gram_;
    cov.diagonal().array() += params_.noise_variance;
    const SpdFactor chol(cov);
    white_y_ = chol.llt.matrixL().solve(y_vector());
    white_ones_ = chol.llt.matrixL().solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_)));
  }

  double log_density_mean(double m) const {
    const double prior = log_prior_mean(m, y_);
    if (!std::isfinite(prior)) return kNegInf;
    return prior - 0.5 * (white_y_ - m * white_ones_).squaredNorm();
  }

  void set_mean(double m) { params_.mean = m; }

  // --- signal and noise variance ------------------------------------------------------
  void prepare_variances() {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram_);
    if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition of the data Gram failed");
    gram_eigenvalues_ = solver.eigenvalues().cwiseMax(0.0);
    const Eigen::VectorXd resid = y_vector().array() - params_.mean;
    projected_sq_ = (solver.eigenvectors().transpose() * resid).array().square();
    signal_prior_ = signal_variance_prior(y_, gram_, priors_);
  }

  [[nodiscard]] const SignalVariancePrior& signal_prior() const noexcept { return signal_prior_; }

  double spectral_log_likelihood(double signal, double noise) const {
    const Eigen::ArrayXd total = signal * gram_eigenvalues_.array() + noise;
    if (!(total > 0.0).all()) return kNegInf;
    return -0.5 * (projected_sq_ / total).sum() - 0.5 * total.log().sum();
  }

  // density over u = log(signal variance), Jacobian included
  double log_density_log_signal(double u) const {
    const double s = signal_from_log(u);
    const double prior = log_prior_signal_variance(s, signal_prior_);
    if (!std::isfinite(prior)) return kNegInf;
    return prior + u + spectral_log_likelihood(s, params_.noise_variance);
  }

  // exp(log(s)) can land an ulp outside the support; pull it back
  [[nodiscard]] double signal_from_log(double u) const {
    const double s = std::exp(u);
    if (u >= std::log(signal_prior_.lower) && u <= std::log(signal_prior_.upper)) {
      return std::clamp(s, signal_prior_.lower, signal_prior_.upper);
    }
    return s;
  }

  void set_signal_variance(double s) { params_.signal_variance = s; }

  double log_density_noise(double s) const {
    if (!(s > 0.0) || !std::isfinite(s)) return kNegInf;
    return log_prior_horseshoe(s, priors_.tau_noise) + spectral_log_likelihood(params_.signal_variance, s);
  }

  void set_noise_variance(double s) { params_.noise_variance = s; }

  // --- per-variable diffusion scale ---------------------------------------------------
  void prepare_beta(std::size_t i) {
    others_ = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_), 1.0);
    for (std::size_t j = 0; j < d_; ++j) {
      if (j != i) multiply_factor(others_, factors_[j], j);
    }
    resid_ = y_vector().array() - params_.mean;
  }

  double log_density_beta(std::size_t i, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) return kNegInf;
    const Eigen::MatrixXd factor = diffusion_factor(space_.variable(i).spectrum, beta);
    candidate_ = others_;
    multiply_factor(candidate_, factor, i);
    const double signal_prior =
        log_prior_signal_variance(params_.signal_variance, signal_variance_prior(y_, candidate_, priors_));
    if (!std::isfinite(signal_prior)) return kNegInf;
    Eigen::MatrixXd cov = params_.signal_variance * candidate_;
    cov.diagonal().array() += params_.noise_variance;
    try {
      const SpdFactor chol(cov);
      const Eigen::VectorXd white = chol.llt.matrixL().solve(resid_);
      return log_prior_horseshoe(beta, priors_.tau_beta) + signal_prior - 0.5 * white.squaredNorm() -
             0.5 * chol.log_determinant();
    } catch (const NumericError&) {
      return kNegInf;
    }
  }

  void set_beta(std::size_t i, double beta) {
    params_.betas[i] = beta;
    factors_[i] = diffusion_factor(space_.variable(i).spectrum, beta);
    gram_ = others_;
    multiply_factor(gram_, factors_[i], i);
  }

 private:
  Eigen::VectorXd y_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(y_.data(), static_cast<Eigen::Index>(n_));
  }

  void multiply_factor(Eigen::MatrixXd& target, const Eigen::MatrixXd& factor, std::size_t var) const {
    const auto& col = columns_[var];
    const auto stride = factor.rows();
    const double* f = factor.data();
    for (std::size_t b = 0; b < n_; ++b) {
      double* out = target.col(static_cast<Eigen::Index>(b)).data();
      const double* frow = f + static_cast<Eigen::Index>(col[b]) * stride;
      for (std::size_t a = 0; a < n_; ++a) out[a] *= frow[col[a]];
    }
  }

  const SearchSpace& space_;
  PriorConfig priors_;
  GpParams params_;
  std::size_t n_;
  std::size_t d_;
  std::vector<double> y_;
  std::vector<std::vector<Vertex::value_type>> columns_;
  std::vector<Eigen::MatrixXd> factors_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd others_;
  Eigen::MatrixXd candidate_;
  Eigen::VectorXd resid_;
  Eigen::VectorXd white_y_;
  Eigen::VectorXd white_ones_;
  Eigen::VectorXd gram_eigenvalues_;
  Eigen::ArrayXd projected_sq_;
  SignalVariancePrior signal_prior_;
  double y_min_ = 0.0;
  double y_max_ = 0.0;
  double var_y_ = 0.0;
};

void check_fit_inputs(const SearchSpace& space, const Dataset& data) {
  if (data.empty()) throw DomainError("cannot fit the surrogate without data");
  data.validate(space);
}

void sweep(ConditionalPosterior& post, Rng& rng, const SamplerConfig& config, const UpdateObserver& observer) {
  using Param = UpdateEvent::Param;
  const auto notify = [&](Param p, std::size_t i = 0) {
    if (observer) observer(UpdateEvent{p, i});
  };

  if (post.y_max() > post.y_min()) {
    post.prepare_mean();
    SliceConfig sc{config.relative_width * (post.y_max() - post.y_min()), config.beta_slice.max_doublings,
                   config.beta_slice.max_shrinks};
    post.set_mean(slice_sample_univariate([&](double m) { return post.log_density_mean(m); }, post.params().mean,
                                          rng, sc));
  } else {
    post.set_mean(post.y_min());
  }
  notify(Param::kMean);

  post.prepare_variances();
  if (post.signal_prior().degenerate) {
    post.set_signal_variance(post.signal_prior().lower);
  } else {
    SliceConfig sc{config.log_signal_width, config.beta_slice.max_doublings, config.beta_slice.max_shrinks};
    const double u = slice_sample_univariate([&](double x) { return post.log_density_log_signal(x); },
                                             std::log(post.params().signal_variance), rng, sc);
    post.set_signal_variance(post.signal_from_log(u));
  }
  notify(Param::kSignalVariance);

  {
    const double scale = post.var_y() > 0.0 ? post.var_y() : post.params().signal_variance;
    SliceConfig sc{config.relative_width * scale, config.beta_slice.max_doublings, config.beta_slice.max_shrinks};
    post.set_noise_variance(slice_sample_univariate([&](double s) { return post.log_density_noise(s); },
                                                    post.params().noise_variance, rng, sc));
  }
  notify(Param::kNoiseVariance);

  std::vector<std::size_t> order(post.params().betas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i : order) {
    post.prepare_beta(i);
    const double beta = slice_sample_univariate([&](double b) { return post.log_density_beta(i, b); },
                                                post.params().betas[i], rng, config.beta_slice);
    post.set_beta(i, beta);
    notify(Param::kBeta, i);
  }
}

}  // namespace

SamplerState make_sampler_state(std::uint64_t seed) {
  SamplerState s;
  s.rng = Rng(seed);
  return s;
}

double log_posterior(const SearchSpace& space, const Dataset& data, const GpParams& params,
                     const PriorConfig& priors) {
  check_fit_inputs(space, data);
  if (!params.valid() || params.betas.size() != space.num_variables()) return kNegInf;
  const KernelFactors kf = kernel_factors(space, params.betas);
  const Eigen::MatrixXd k = data_gram(kf, data);
  double lp = log_prior_mean(params.mean, data.values) +
              log_prior_signal_variance(params.signal_variance, data.values, k, priors) +
              log_prior_horseshoe(params.noise_variance, priors.tau_noise);
  for (double b : params.betas) lp += log_prior_horseshoe(b, priors.tau_beta);
  if (!std::isfinite(lp)) return kNegInf;
  try {
    return lp - neg_log_marginal_likelihood(k, data.values, params.mean, params.signal_variance,
                                            params.noise_variance);
  } catch (const NumericError&) {
    return kNegInf;
  }
}

GpParams initial_params(const SearchSpace& space, const Dataset& data, const PriorConfig& priors) {
  check_fit_inputs(space, data);
  GpParams p;
  p.betas.assign(space.num_variables(), 1.0);
  p.mean = mean_of(data.values);
  const double var_y = population_variance(data.values);
  const auto prior = signal_variance_prior(data.values, data_gram(kernel_factors(space, p.betas), data), priors);
  p.signal_variance = std::clamp(var_y > 0.0 ? var_y : prior.lower, prior.lower, prior.upper);
  p.noise_variance = 1e-3 * (var_y > 0.0 ? var_y : priors.signal_variance_floor);
  return p;
}

namespace {

// Moves a state carried over from a smaller dataset back into the prior support.
GpParams project_into_support(const SearchSpace& space, const Dataset& data, const PriorConfig& priors,
                              GpParams p) {
  const auto [lo, hi] = std::minmax_element(data.values.begin(), data.values.end());
  p.mean = (*lo == *hi) ? mean_of(data.values) : std::clamp(p.mean, *lo, *hi);
  const auto prior = signal_variance_prior(data.values, data_gram(kernel_factors(space, p.betas), data), priors);
  p.signal_variance = std::clamp(p.signal_variance, prior.lower, prior.upper);
  return p;
}

}  // namespace

std::vector<GpParams> fit_surrogate(const Dataset& data, SamplerState& state, const PriorConfig& priors,
                                    const SearchSpace& space, const SamplerConfig& config,
                                    const UpdateObserver& observer) {
  check_fit_inputs(space, data);
  GpParams start;
  if (state.initialized && state.current.betas.size() == space.num_variables()) {
    start = project_into_support(space, data, priors, state.current);
    if (!std::isfinite(log_posterior(space, data, start, priors))) {
      spdlog::warn("carried-over GP parameters have zero posterior density; restarting from defaults");
      start = initial_params(space, data, priors);
    }
  } else {
    start = initial_params(space, data, priors);
  }
  state.initialized = true;

  ConditionalPosterior post(space, data, priors, std::move(start));
  const int burn = (!state.burned_in || config.burn_in_every_call) ? config.burn_in_sweeps : 0;
  for (int s = 0; s < burn; ++s) sweep(post, state.rng, config, observer);
  state.burned_in = true;

  std::vector<GpParams> samples;
  samples.reserve(static_cast<std::size_t>(config.samples));
  for (int s = 0; s < config.samples; ++s) {
    sweep(post, state.rng, config, observer);
    samples.push_back(post.params());
  }
  state.current = post.params();
  return samples;
}

}  // namespace combo
