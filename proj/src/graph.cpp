#include "combo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "combo/errors.hpp"

namespace combo {

std::string Vertex::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(indices_[i]);
  }
  return out;
}

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (auto idx : v) h = mix_seed(h ^ idx);
  return static_cast<std::size_t>(h);
}

std::size_t hamming_distance(const Vertex& a, const Vertex& b) {
  if (a.size() != b.size()) throw BoundsError("hamming_distance: vertices have different lengths");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

// ---------------------------------------------------------------------------------------
// SubGraph

SubGraph SubGraph::complete(std::size_t size) {
  if (size == 0) throw InvalidVariableError("complete sub-graph needs at least one category");
  Adjacency adj(size, std::vector<bool>(size, true));
  for (std::size_t i = 0; i < size; ++i) adj[i][i] = false;
  return SubGraph(Kind::kComplete, std::move(adj));
}

SubGraph SubGraph::path(std::size_t size) {
  if (size == 0) throw InvalidVariableError("path sub-graph needs at least one category");
  Adjacency adj(size, std::vector<bool>(size, false));
  for (std::size_t i = 0; i + 1 < size; ++i) {
    adj[i][i + 1] = true;
    adj[i + 1][i] = true;
  }
  return SubGraph(Kind::kPath, std::move(adj));
}

SubGraph SubGraph::custom(Adjacency adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw InvalidVariableError("custom sub-graph needs at least one category");
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) throw InvalidVariableError("custom adjacency must be square");
    if (adjacency[i][i]) throw InvalidVariableError("custom adjacency must not contain self-loops");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adjacency[i][j] != adjacency[j][i]) {
        throw InvalidVariableError("custom adjacency must be symmetric");
      }
    }
  }
  return SubGraph(Kind::kCustom, std::move(adjacency));
}

std::size_t SubGraph::degree(std::size_t a) const {
  std::size_t d = 0;
  for (bool e : adjacency_.at(a)) d += e ? 1 : 0;
  return d;
}

std::size_t SubGraph::edge_count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < size(); ++i) total += degree(i);
  return total / 2;
}

std::vector<std::pair<std::size_t, std::size_t>> SubGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (adjacency_[i][j]) out.emplace_back(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd laplacian(const SubGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (graph.adjacency()[i][j]) lap(i, j) = -1.0;
    }
    lap(i, i) = static_cast<double>(graph.degree(static_cast<std::size_t>(i)));
  }
  return lap;
}

namespace {

// Orthonormal basis whose first column is the normalized constant vector (Helmert basis).
Eigensystem complete_spectrum(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(k);
  Eigensystem es;
  es.eigenvalues = Eigen::VectorXd::Constant(n, static_cast<double>(k));
  es.eigenvalues(0) = 0.0;
  es.eigenvectors = Eigen::MatrixXd::Zero(n, n);
  es.eigenvectors.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(k)));
  for (Eigen::Index j = 1; j < n; ++j) {
    const double jd = static_cast<double>(j);
    const double scale = 1.0 / std::sqrt(jd * (jd + 1.0));
    es.eigenvectors.col(j).head(j).setConstant(scale);
    es.eigenvectors(j, j) = -jd * scale;
  }
  return es;
}

}  // namespace

Eigensystem eigensystem(const SubGraph& graph) {
  if (graph.kind() == SubGraph::Kind::kComplete) return complete_spectrum(graph.size());

  const Eigen::MatrixXd lap = laplacian(graph);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigendecomposition of a " << graph.size() << "-vertex Laplacian failed (max |L_ij| = "
        << lap.cwiseAbs().maxCoeff() << ")";
    throw NumericError(msg.str());
  }
  Eigensystem es{solver.eigenvalues(), solver.eigenvectors()};
  // The Laplacian is PSD; round-off can leave the null eigenvalue slightly negative.
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues(i) < 0.0 && es.eigenvalues(i) > -1e-12) es.eigenvalues(i) = 0.0;
  }
  return es;
}

// ---------------------------------------------------------------------------------------
// SearchSpace

SearchSpace::SearchSpace(std::vector<SubGraph> graphs) {
  variables_.reserve(graphs.size());
  for (auto& g : graphs) {
    Eigensystem es = eigensystem(g);
    const auto n = static_cast<std::uint64_t>(g.size());
    if (!saturated_) {
      if (total_size_ > std::numeric_limits<std::uint64_t>::max() / n) {
        saturated_ = true;
        total_size_ = std::numeric_limits<std::uint64_t>::max();
      } else {
        total_size_ *= n;
      }
    }
    log_total_size_ += std::log(static_cast<double>(n));
    variables_.push_back(Variable{std::move(g), std::move(es)});
  }
}

bool SearchSpace::contains(const Vertex& v) const noexcept {
  if (v.size() != variables_.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= variables_[i].graph.size()) return false;
  }
  return true;
}

void SearchSpace::check(const Vertex& v) const {
  if (v.size() != variables_.size()) {
    throw BoundsError("vertex has " + std::to_string(v.size()) + " indices, space has " +
                      std::to_string(variables_.size()) + " variables");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= variables_[i].graph.size()) {
      throw BoundsError("index " + std::to_string(v[i]) + " of variable " + std::to_string(i) +
                        " is out of range [0, " + std::to_string(variables_[i].graph.size()) + ")");
    }
  }
}

std::vector<Vertex> SearchSpace::neighbors(const Vertex& v) const {
  check(v);
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& g = variables_[i].graph;
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (g.adjacent(v[i], c)) {
        Vertex w = v;
        w[i] = static_cast<Vertex::value_type>(c);
        out.push_back(std::move(w));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vertex SearchSpace::uniform_vertex(Rng& rng) const {
  std::vector<Vertex::value_type> idx(variables_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, variables_[i].graph.size() - 1);
    idx[i] = static_cast<Vertex::value_type>(pick(rng));
  }
  return Vertex(std::move(idx));
}

std::uint64_t SearchSpace::rank(const Vertex& v) const {
  check(v);
  if (saturated_) throw EnumerationLimitError("search space too large to rank vertices");
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < v.size(); ++i) r = r * variables_[i].graph.size() + v[i];
  return r;
}

Vertex SearchSpace::unrank(std::uint64_t index) const {
  if (saturated_ || index >= total_size_) throw BoundsError("vertex rank out of range");
  std::vector<Vertex::value_type> idx(variables_.size());
  for (std::size_t i = variables_.size(); i-- > 0;) {
    const auto n = variables_[i].graph.size();
    idx[i] = static_cast<Vertex::value_type>(index % n);
    index /= n;
  }
  return Vertex(std::move(idx));
}

// ---------------------------------------------------------------------------------------
// Breadth-first oracle

namespace {

void check_enumerable(const SearchSpace& space, std::uint64_t cap) {
  if (space.total_size_saturated() || space.total_size() > cap) {
    throw EnumerationLimitError("product graph has more than " + std::to_string(cap) +
                                " vertices; refusing to enumerate");
  }
}

std::vector<std::size_t> bfs_from(const SearchSpace& space, std::uint64_t source) {
  constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(space.total_size(), kUnseen);
  std::deque<std::uint64_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    for (const auto& w : space.neighbors(space.unrank(cur))) {
      const auto r = space.rank(w);
      if (dist[r] == kUnseen) {
        dist[r] = dist[cur] + 1;
        queue.push_back(r);
      }
    }
  }
  return dist;
}

}  // namespace

std::size_t shortest_path_oracle(const SearchSpace& space, const Vertex& from, const Vertex& to,
                                 std::uint64_t enumeration_cap) {
  check_enumerable(space, enumeration_cap);
  space.check(from);
  space.check(to);
  if (from == to) return 0;
  return bfs_from(space, space.rank(from))[space.rank(to)];
}

std::vector<std::vector<std::size_t>> all_pairs_shortest_paths(const SearchSpace& space,
                                                               std::uint64_t enumeration_cap) {
  check_enumerable(space, enumeration_cap);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(space.total_size());
  for (std::uint64_t s = 0; s < space.total_size(); ++s) out.push_back(bfs_from(space, s));
  return out;
}

}  // namespace combo
