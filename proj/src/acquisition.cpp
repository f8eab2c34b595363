#include "combo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_set>

#include "combo/errors.hpp"

namespace combo {

void AcquisitionConfig::validate() const {
  if (n_random_candidates == 0 || n_spray == 0 || spray_radius == 0 || n_bfls_starts == 0) {
    throw ConfigError("acquisition counts and spray radius must be positive");
  }
  if (n_bfls_starts > n_random_candidates + n_spray) {
    throw ConfigError("n_bfls_starts cannot exceed the number of candidates");
  }
}

double expected_improvement(const PredictiveDistribution& pred, double best) {
  const double gap = best - pred.mean;
  const double sigma = std::sqrt(std::max(pred.variance, 0.0));
  if (!(sigma > 0.0)) return std::max(gap, 0.0);
  const double z = gap / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(gap * cdf + sigma * pdf, 0.0);
}

// ---------------------------------------------------------------------------------------

AcquisitionFunction::AcquisitionFunction(const SearchSpace& space, const Dataset& data,
                                         std::span<const GpParams> samples, AcquisitionConfig::Reduction reduction)
    : reduction_(reduction) {
  if (samples.empty()) throw DomainError("acquisition needs at least one posterior sample");
  if (data.empty()) throw DomainError("acquisition needs data to define the incumbent");
  best_ = *std::min_element(data.values.begin(), data.values.end());
  posteriors_.reserve(samples.size());
  for (const auto& s : samples) posteriors_.emplace_back(space, data, s);
}

std::vector<double> AcquisitionFunction::operator()(std::span<const Vertex> candidates) const {
  std::vector<double> out(candidates.size(), reduction_ == AcquisitionConfig::Reduction::kMax ? 0.0 : 0.0);
  std::vector<PredictiveDistribution> preds(candidates.size());
  for (const auto& post : posteriors_) {
    post.predict(candidates, preds);
    for (std::size_t b = 0; b < candidates.size(); ++b) {
      const double ei = expected_improvement(preds[b], best_);
      if (reduction_ == AcquisitionConfig::Reduction::kMax) {
        out[b] = std::max(out[b], ei);
      } else {
        out[b] += ei;
      }
    }
  }
  if (reduction_ == AcquisitionConfig::Reduction::kMean) {
    for (double& v : out) v /= static_cast<double>(posteriors_.size());
  }
  return out;
}

double AcquisitionFunction::operator()(const Vertex& v) const {
  return (*this)(std::span<const Vertex>(&v, 1)).front();
}

double acquisition_value(const Vertex& v, const SearchSpace& space, const Dataset& data,
                         std::span<const GpParams> samples) {
  space.check(v);
  return AcquisitionFunction(space, data, samples)(v);
}

// ---------------------------------------------------------------------------------------

std::vector<Vertex> spray_vertices(const Vertex& center, const SearchSpace& space, std::size_t radius,
                                   std::size_t count, Rng& rng) {
  space.check(center);
  std::vector<std::size_t> mutable_vars;
  for (std::size_t i = 0; i < space.num_variables(); ++i) {
    if (space.category_count(i) > 1) mutable_vars.push_back(i);
  }
  std::vector<Vertex> out;
  out.reserve(count);
  if (radius == 0 || mutable_vars.empty()) {
    out.assign(count, center);
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t r = std::uniform_int_distribution<std::size_t>(1, radius)(rng);
    std::vector<std::size_t> pool = mutable_vars;
    const std::size_t changes = std::min(r, pool.size());
    Vertex v = center;
    for (std::size_t c = 0; c < changes; ++c) {
      // partial Fisher-Yates: draw a distinct variable
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(c, pool.size() - 1)(rng);
      std::swap(pool[c], pool[pick]);
      const std::size_t var = pool[c];
      const std::size_t n = space.category_count(var);
      auto value = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
      if (value >= v[var]) ++value;
      v[var] = static_cast<Vertex::value_type>(value);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::pair<Vertex, double> bfls(const Vertex& start, const BatchScore& score, const SearchSpace& space,
                               std::map<Vertex, double>* visited) {
  space.check(start);
  Vertex current = start;
  double current_value = score(std::span<const Vertex>(&current, 1)).front();
  if (visited != nullptr) (*visited)[current] = current_value;
  while (true) {
    const std::vector<Vertex> nbrs = space.neighbors(current);
    if (nbrs.empty()) break;
    const std::vector<double> values = score(nbrs);
    std::size_t best = 0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (visited != nullptr) (*visited)[nbrs[k]] = values[k];
      // neighbors are sorted, so strict > keeps the lowest vertex among ties
      if (values[k] > values[best]) best = k;
    }
    if (!(values[best] > current_value)) break;
    current = nbrs[best];
    current_value = values[best];
  }
  return {current, current_value};
}

// ---------------------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kExhaustiveFallbackCap = 1'000'000;

Vertex random_unevaluated(const SearchSpace& space, const std::unordered_set<Vertex, VertexHash>& evaluated,
                          Rng& rng) {
  if (!space.total_size_saturated() && space.total_size() <= kExhaustiveFallbackCap) {
    std::vector<std::uint64_t> free_ranks;
    for (std::uint64_t r = 0; r < space.total_size(); ++r) {
      if (!evaluated.contains(space.unrank(r))) free_ranks.push_back(r);
    }
    if (free_ranks.empty()) throw SearchSpaceExhaustedError("every vertex of the search space has been evaluated");
    return space.unrank(free_ranks[std::uniform_int_distribution<std::size_t>(0, free_ranks.size() - 1)(rng)]);
  }
  for (int attempt = 0; attempt < 100'000; ++attempt) {
    Vertex v = space.uniform_vertex(rng);
    if (!evaluated.contains(v)) return v;
  }
  throw SearchSpaceExhaustedError("could not find an unevaluated vertex by rejection sampling");
}

}  // namespace

Vertex next_vertex(const Dataset& data, std::span<const GpParams> samples, const SearchSpace& space,
                   const AcquisitionConfig& config, Rng& rng) {
  config.validate();
  if (data.empty()) throw DomainError("next_vertex needs at least one evaluation");
  data.validate(space);

  const std::unordered_set<Vertex, VertexHash> evaluated(data.vertices.begin(), data.vertices.end());
  if (!space.total_size_saturated() && evaluated.size() >= space.total_size()) {
    throw SearchSpaceExhaustedError("every vertex of the search space has been evaluated");
  }

  const AcquisitionFunction acq(space, data, samples, config.reduction);

  std::vector<Vertex> pool;
  if (!space.total_size_saturated() && space.total_size() <= config.n_random_candidates) {
    pool.reserve(space.total_size() + config.n_spray);
    for (std::uint64_t r = 0; r < space.total_size(); ++r) pool.push_back(space.unrank(r));
  } else {
    pool.reserve(config.n_random_candidates + config.n_spray);
    for (std::size_t k = 0; k < config.n_random_candidates; ++k) pool.push_back(space.uniform_vertex(rng));
  }
  const auto best_it = std::min_element(data.values.begin(), data.values.end());
  const Vertex& incumbent = data.vertices[static_cast<std::size_t>(best_it - data.values.begin())];
  for (auto& v : spray_vertices(incumbent, space, config.spray_radius, config.n_spray, rng)) {
    pool.push_back(std::move(v));
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  std::map<Vertex, double> explored;
  const std::vector<double> pool_scores = acq(pool);
  for (std::size_t k = 0; k < pool.size(); ++k) explored.emplace(pool[k], pool_scores[k]);

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n_starts = std::min(config.n_bfls_starts, pool.size());
  // pool is sorted, so a stable sort on score breaks ties by lowest vertex
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool_scores[a] > pool_scores[b]; });

  const BatchScore memo_score = [&](std::span<const Vertex> vs) {
    std::vector<double> out(vs.size());
    std::vector<Vertex> missing;
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < vs.size(); ++k) {
      if (auto it = explored.find(vs[k]); it != explored.end()) {
        out[k] = it->second;
      } else {
        missing.push_back(vs[k]);
        slots.push_back(k);
      }
    }
    if (!missing.empty()) {
      const auto fresh = acq(missing);
      for (std::size_t k = 0; k < missing.size(); ++k) out[slots[k]] = fresh[k];
    }
    return out;
  };
  for (std::size_t s = 0; s < n_starts; ++s) bfls(pool[order[s]], memo_score, space, &explored);

  const Vertex* choice = nullptr;
  double choice_value = 0.0;
  for (const auto& [v, value] : explored) {
    if (evaluated.contains(v)) continue;
    if (choice == nullptr || value > choice_value) {
      choice = &v;
      choice_value = value;
    }
  }
  if (choice != nullptr) return *choice;
  return random_unevaluated(space, evaluated, rng);
}

}  // namespace combo
