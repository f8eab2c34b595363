#include "combo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "combo/errors.hpp"

namespace combo::oracle {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol, int max_sweeps) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw DomainError("jacobi_eigen needs a square matrix");
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) < tol * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        // rotation angle zeroing a(p, q); Golub & Van Loan, sym.schur2
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

Eigen::MatrixXd gauss_jordan_inverse(const Eigen::MatrixXd& input) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw DomainError("gauss_jordan_inverse needs a square matrix");
  Eigen::MatrixXd a = input;
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (a(pivot, col) == 0.0) throw NumericError("gauss_jordan_inverse: singular matrix");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      inv.row(pivot).swap(inv.row(col));
    }
    const double d = a(col, col);
    a.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      a.row(r) -= f * a.row(col);
      inv.row(r) -= f * inv.row(col);
    }
  }
  return inv;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

// built from the adjacency directly rather than through combo::laplacian
Eigen::MatrixXd adjacency_laplacian(const SubGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (g.adjacency()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        l(i, j) = -1.0;
        l(i, i) += 1.0;
      }
    }
  }
  return l;
}

void check_enumerable(const SearchSpace& space, std::uint64_t cap) {
  if (space.total_size_saturated() || space.total_size() > cap) {
    throw EnumerationLimitError("space of size exp(" + std::to_string(space.log_total_size()) +
                                ") exceeds the enumeration cap " + std::to_string(cap));
  }
}

}  // namespace

Eigen::MatrixXd product_laplacian(const SearchSpace& space, std::span<const double> weights) {
  check_enumerable(space, 4096);
  const std::size_t d = space.num_variables();
  if (!weights.empty() && weights.size() != d) throw DomainError("product_laplacian: weight count mismatch");
  const auto total = static_cast<Eigen::Index>(space.total_size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total, total);
  for (std::size_t i = 0; i < d; ++i) {
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(1, 1);
    for (std::size_t j = 0; j < d; ++j) {
      const auto nj = static_cast<Eigen::Index>(space.category_count(j));
      term = kron(term, j == i ? adjacency_laplacian(space.variable(j).graph) : Eigen::MatrixXd::Identity(nj, nj));
    }
    out += (weights.empty() ? 1.0 : weights[i]) * term;
  }
  return out;
}

Eigen::MatrixXd dense_diffusion_kernel(const SearchSpace& space, std::span<const double> betas, bool normalize) {
  const Eigen::MatrixXd l = product_laplacian(space, betas);
  const SymmetricEigen eig = jacobi_eigen(l);
  Eigen::VectorXd w = (-eig.values.array()).exp();
  if (normalize) w /= w.mean();
  return eig.vectors * w.asDiagonal() * eig.vectors.transpose();
}

Eigen::MatrixXd gram_from_dense(const SearchSpace& space, const Eigen::MatrixXd& dense, std::span<const Vertex> x1,
                                std::span<const Vertex> x2) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x1.size()), static_cast<Eigen::Index>(x2.size()));
  for (std::size_t a = 0; a < x1.size(); ++a) {
    for (std::size_t b = 0; b < x2.size(); ++b) {
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          dense(static_cast<Eigen::Index>(space.rank(x1[a])), static_cast<Eigen::Index>(space.rank(x2[b])));
    }
  }
  return out;
}

DenseGp dense_gp(const SearchSpace& space, const Dataset& data, const GpParams& params,
                 std::span<const Vertex> queries) {
  const Eigen::MatrixXd dense = dense_diffusion_kernel(space, params.betas, true);
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd c = params.signal_variance * gram_from_dense(space, dense, data.vertices, data.vertices);
  c.diagonal().array() += params.noise_variance;
  const Eigen::MatrixXd c_inv = gauss_jordan_inverse(c);
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = data.values[static_cast<std::size_t>(i)] - params.mean;

  DenseGp out;
  const SymmetricEigen eig = jacobi_eigen(c);
  const double log_det = eig.values.array().log().sum();
  out.nll = 0.5 * r.dot(c_inv * r) + 0.5 * log_det + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  const Eigen::MatrixXd k_qd = params.signal_variance * gram_from_dense(space, dense, queries, data.vertices);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const double prior = params.signal_variance * dense(static_cast<Eigen::Index>(space.rank(queries[q])),
                                                        static_cast<Eigen::Index>(space.rank(queries[q])));
    const Eigen::VectorXd k = k_qd.row(qi).transpose();
    out.predictions.push_back({params.mean + k.dot(c_inv * r), prior - k.dot(c_inv * k)});
  }
  return out;
}

std::pair<Vertex, double> brute_force_minimum(const SearchSpace& space, const std::function<double(const Vertex&)>& f,
                                              std::uint64_t enumeration_cap) {
  check_enumerable(space, enumeration_cap);
  Vertex best = space.unrank(0);
  double best_value = f(best);
  for (std::uint64_t r = 1; r < space.total_size(); ++r) {
    Vertex v = space.unrank(r);
    const double value = f(v);
    if (value < best_value) {
      best_value = value;
      best = std::move(v);
    }
  }
  return {best, best_value};
}

double ising_kl_enumeration(std::size_t n_spins, std::span<const std::pair<std::size_t, std::size_t>> edges,
                            std::span<const double> coupling, std::span<const int> mask) {
  if (coupling.size() != edges.size() || mask.size() != edges.size()) {
    throw DomainError("ising_kl_enumeration: edge arrays differ in length");
  }
  if (n_spins > 24) throw EnumerationLimitError("ising_kl_enumeration: too many spins");
  const std::size_t states = std::size_t{1} << n_spins;
  std::vector<double> log_p(states);
  std::vector<double> log_q(states);
  std::vector<int> spin(n_spins);
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t k = 0; k < n_spins; ++k) spin[k] = ((s >> k) & 1U) ? 1 : -1;
    double ep = 0.0;
    double eq = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      // z^T J z with J symmetric counts every edge twice
      const double term = 2.0 * coupling[e] * spin[edges[e].first] * spin[edges[e].second];
      ep += term;
      if (mask[e] != 0) eq += term;
    }
    log_p[s] = ep;
    log_q[s] = eq;
  }
  const auto log_sum_exp = [](const std::vector<double>& x) {
    const double m = *std::max_element(x.begin(), x.end());
    double acc = 0.0;
    for (double v : x) acc += std::exp(v - m);
    return m + std::log(acc);
  };
  const double log_zp = log_sum_exp(log_p);
  const double log_zq = log_sum_exp(log_q);
  double kl = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    const double lp = log_p[s] - log_zp;
    const double lq = log_q[s] - log_zq;
    kl += std::exp(lp) * (lp - lq);
  }
  return kl;
}

}  // namespace combo::oracle
