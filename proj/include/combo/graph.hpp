#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "combo/rng.hpp"

namespace combo {

/// Joint assignment of all combinatorial variables: one category index per variable.
class Vertex {
 public:
  using value_type = std::uint32_t;

  Vertex() = default;
  explicit Vertex(std::vector<value_type> indices) : indices_(std::move(indices)) {}
  Vertex(std::initializer_list<value_type> indices) : indices_(indices) {}

  [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
  [[nodiscard]] value_type operator[](std::size_t i) const { return indices_[i]; }
  value_type& operator[](std::size_t i) { return indices_[i]; }
  [[nodiscard]] auto begin() const noexcept { return indices_.begin(); }
  [[nodiscard]] auto end() const noexcept { return indices_.end(); }
  [[nodiscard]] const std::vector<value_type>& indices() const noexcept { return indices_; }

  friend auto operator<=>(const Vertex&, const Vertex&) = default;
  friend bool operator==(const Vertex&, const Vertex&) = default;

  /// Semicolon-joined indices, e.g. "0;2;1".
  [[nodiscard]] std::string to_string() const;

 private:
  std::vector<value_type> indices_;
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept;
};

std::size_t hamming_distance(const Vertex& a, const Vertex& b);

/// Boolean adjacency matrix, row-major, symmetric with empty diagonal.
using Adjacency = std::vector<std::vector<bool>>;

/// Graph over the categories of one variable.
class SubGraph {
 public:
  enum class Kind { kComplete, kPath, kCustom };

  /// Categorical variable: every pair of categories is adjacent.
  static SubGraph complete(std::size_t size);
  /// Ordinal variable: category j is adjacent to j-1 and j+1.
  static SubGraph path(std::size_t size);
  static SubGraph custom(Adjacency adjacency);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t size() const noexcept { return adjacency_.size(); }
  [[nodiscard]] bool adjacent(std::size_t a, std::size_t b) const { return adjacency_.at(a).at(b); }
  [[nodiscard]] std::size_t degree(std::size_t a) const;
  [[nodiscard]] std::size_t edge_count() const;
  /// Edges (a, b) with a < b in lexicographic order.
  [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  [[nodiscard]] const Adjacency& adjacency() const noexcept { return adjacency_; }

 private:
  SubGraph(Kind kind, Adjacency adjacency) : kind_(kind), adjacency_(std::move(adjacency)) {}

  Kind kind_;
  Adjacency adjacency_;
};

/// Laplacian spectrum of a sub-graph: eigenvalues ascending, eigenvectors in matching columns.
struct Eigensystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Degree minus adjacency.
Eigen::MatrixXd laplacian(const SubGraph& graph);

/// Complete graphs use the closed-form spectrum {0, k, ..., k}; other graphs a dense
/// symmetric eigensolver. Throws NumericError if the decomposition fails.
Eigensystem eigensystem(const SubGraph& graph);

/// Implicit graph Cartesian product of per-variable sub-graphs. The product graph itself
/// is never built; vertices are index tuples.
class SearchSpace {
 public:
  struct Variable {
    SubGraph graph;
    Eigensystem spectrum;
  };

  explicit SearchSpace(std::vector<SubGraph> graphs);

  [[nodiscard]] std::size_t num_variables() const noexcept { return variables_.size(); }
  [[nodiscard]] const Variable& variable(std::size_t i) const { return variables_.at(i); }
  [[nodiscard]] const std::vector<Variable>& variables() const noexcept { return variables_; }
  [[nodiscard]] std::size_t category_count(std::size_t i) const { return variables_.at(i).graph.size(); }

  /// Number of vertices, saturating at UINT64_MAX.
  [[nodiscard]] std::uint64_t total_size() const noexcept { return total_size_; }
  [[nodiscard]] bool total_size_saturated() const noexcept { return saturated_; }
  /// Natural log of the number of vertices (exact even when total_size saturates).
  [[nodiscard]] double log_total_size() const noexcept { return log_total_size_; }

  [[nodiscard]] bool contains(const Vertex& v) const noexcept;
  /// Throws BoundsError unless contains(v).
  void check(const Vertex& v) const;

  /// Product-graph neighbors in lexicographic order.
  [[nodiscard]] std::vector<Vertex> neighbors(const Vertex& v) const;

  [[nodiscard]] Vertex uniform_vertex(Rng& rng) const;

  /// Mixed-radix rank with the first variable most significant (Kronecker ordering).
  /// Requires the space to be small enough for total_size() not to saturate.
  [[nodiscard]] std::uint64_t rank(const Vertex& v) const;
  [[nodiscard]] Vertex unrank(std::uint64_t index) const;

 private:
  std::vector<Variable> variables_;
  std::uint64_t total_size_ = 1;
  bool saturated_ = false;
  double log_total_size_ = 0.0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Breadth-first shortest path on the explicitly enumerated product graph. Intended for
/// verification only; throws EnumerationLimitError above `enumeration_cap` vertices.
std::size_t shortest_path_oracle(const SearchSpace& space, const Vertex& from, const Vertex& to,
                                 std::uint64_t enumeration_cap = kDefaultEnumerationCap);

/// All-pairs variant of shortest_path_oracle: row `rank(a)` holds distances from a.
std::vector<std::vector<std::size_t>> all_pairs_shortest_paths(
    const SearchSpace& space, std::uint64_t enumeration_cap = kDefaultEnumerationCap);

}  // namespace combo
