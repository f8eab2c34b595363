#pragma once

#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "combo/graph.hpp"
#include "combo/rng.hpp"
#include "combo/surrogate.hpp"

namespace combo {

struct AcquisitionConfig {
  enum class Reduction { kMean, kMax };

  std::size_t n_random_candidates = 20'000;
  std::size_t n_spray = 20;
  std::size_t spray_radius = 2;
  std::size_t n_bfls_starts = 20;
  /// How EI values under the individual posterior samples are combined.
  Reduction reduction = Reduction::kMean;

  /// Throws ConfigError unless counts are positive and n_bfls_starts <= candidates + spray.
  void validate() const;
};

/// Expected improvement below `best` (minimization).
double expected_improvement(const PredictiveDistribution& pred, double best);

/// Expected improvement marginalized over posterior samples of the GP hyperparameters.
class AcquisitionFunction {
 public:
  AcquisitionFunction(const SearchSpace& space, const Dataset& data, std::span<const GpParams> samples,
                      AcquisitionConfig::Reduction reduction = AcquisitionConfig::Reduction::kMean);

  [[nodiscard]] double operator()(const Vertex& v) const;
  [[nodiscard]] std::vector<double> operator()(std::span<const Vertex> candidates) const;

  [[nodiscard]] double incumbent() const noexcept { return best_; }
  [[nodiscard]] const std::vector<GpPosterior>& posteriors() const noexcept { return posteriors_; }

 private:
  std::vector<GpPosterior> posteriors_;
  double best_;
  AcquisitionConfig::Reduction reduction_;
};

/// Mean EI over `samples` at v, with the incumbent min(y).
double acquisition_value(const Vertex& v, const SearchSpace& space, const Dataset& data,
                         std::span<const GpParams> samples);

/// Vertices drawn from the Hamming ball of `radius` around `center`: pick r in {1..radius},
/// change r distinct variables to a different category each. Single-category variables
/// are never changed.
std::vector<Vertex> spray_vertices(const Vertex& center, const SearchSpace& space, std::size_t radius,
                                   std::size_t count, Rng& rng);

using BatchScore = std::function<std::vector<double>(std::span<const Vertex>)>;

/// Greedy ascent over product-graph neighbors. Each step moves to the best neighbor
/// (ties: lowest vertex) if it is strictly better than the current vertex. Every scored
/// vertex is recorded in `visited` when given.
std::pair<Vertex, double> bfls(const Vertex& start, const BatchScore& score, const SearchSpace& space,
                               std::map<Vertex, double>* visited = nullptr);

/// Maximizes the acquisition over random + spray candidates refined by BFLS and returns
/// the best vertex not yet in `data`. Throws SearchSpaceExhaustedError when every vertex
/// has been evaluated.
Vertex next_vertex(const Dataset& data, std::span<const GpParams> samples, const SearchSpace& space,
                   const AcquisitionConfig& config, Rng& rng);

}  // namespace combo
