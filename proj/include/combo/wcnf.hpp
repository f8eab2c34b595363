#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "combo/graph.hpp"

namespace combo {

struct WcnfClause {
  double weight = 1.0;
  std::vector<int> literals;  // DIMACS signed, 1-based

  friend bool operator==(const WcnfClause&, const WcnfClause&) = default;
};

enum class WeightNormalization {
  kStandardize,  // (w - mean) / population std
  kUnit,         // w / max w
  kNone,
};

struct WcnfInstance {
  std::size_t n_vars = 0;
  std::vector<WcnfClause> clauses;
  WeightNormalization normalization = WeightNormalization::kStandardize;
  std::vector<double> normalized_weights;

  friend bool operator==(const WcnfInstance&, const WcnfInstance&) = default;
};

std::vector<double> normalize_weights(std::span<const double> weights, WeightNormalization mode);

/// DIMACS WCNF: 'c' comment lines, a 'p wcnf <nvars> <nclauses> [top]' header, then one
/// '<weight> <lit> ... 0' clause per line. Hard clauses (weight >= top) are rejected.
/// Throws ParseError carrying the 1-based line number.
WcnfInstance parse_wcnf(std::string_view text, WeightNormalization mode = WeightNormalization::kStandardize);
WcnfInstance read_wcnf(const std::string& path, WeightNormalization mode = WeightNormalization::kStandardize);

/// Writes the raw weights with 17 significant digits so the text reparses bit-exactly.
std::string serialize_wcnf(const WcnfInstance& instance);

/// True iff some literal agrees with the binary assignment x (x[v-1] == 1 for literal +v).
bool clause_satisfied(const WcnfClause& clause, const Vertex& x);

/// Minus the sum of normalized weights of satisfied clauses.
double wmaxsat_objective(const Vertex& x, const WcnfInstance& instance);

/// Random instance with clause lengths 1..max_len over distinct variables and integer
/// weights 1..max_weight.
WcnfInstance random_wcnf(std::size_t n_vars, std::size_t n_clauses, std::size_t max_len, int max_weight,
                         std::uint64_t seed, WeightNormalization mode = WeightNormalization::kStandardize);

std::string to_string(WeightNormalization mode);
WeightNormalization weight_normalization_from_string(const std::string& name);

}  // namespace combo
